import concurrent.futures
import dataclasses
import os
import typing

import numpy as np
import pandas as pd

import configs
import src.attacks as attacks
import src.fga as fga
import src.generators as generators
import src.loader as loader
import src.utils as utils
import src.wsn as wsn


RECORD_COLUMNS = ["cell", "sample", "mode", "attacker_class", "k", "k1", "k2", "target", "attackers",
                  "moves", "goodness_before", "goodness_after", "delta", "delta_direct", "delta_indirect",
                  "exhausted"]
SUMMARY_STATS = ["n", "mean", "sd", "min", "max", "median", "q75", "ci_half_width"]


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    name: str = "campaign"
    dataset: typing.Optional[str] = None
    generator: typing.Optional[generators.GeneratorSpec] = None
    mode: str = attacks.DIRECT
    k_values: typing.Tuple[int, ...] = configs.CAMPAIGN_K_VALUES
    k1_values: typing.Tuple[int, ...] = configs.MIXED_K_VALUES
    k2_values: typing.Tuple[int, ...] = configs.MIXED_K_VALUES
    criteria: attacks.SelectionCriteria = attacks.SelectionCriteria()
    samples: int = 20
    scale: int = configs.SCALE
    max_edges: int = configs.MAX_EDGES
    seed: int = 0
    warm: bool = True
    workers: int = 1
    data_dir: typing.Optional[str] = None

    def __post_init__(self):
        if (self.dataset is None) == (self.generator is None):
            raise ValueError("exactly one of dataset or generator must be given")
        if self.mode not in attacks.MODES:
            raise ValueError(f"unknown attack mode: {self.mode}")
        if self.samples < 0 or self.workers < 1:
            raise ValueError(f"invalid samples ({self.samples}) or workers ({self.workers})")
        for k in self.k_values + self.k1_values + self.k2_values:
            if k < 0:
                raise ValueError(f"attacker counts must be non-negative, got {k}")

    def cells(self) -> typing.List[typing.Tuple[int, int]]:
        """(k1, k2) per cell; k1 is the attacker count and k2 is 0 outside mixed mode."""
        if self.mode == attacks.MIXED:
            return [(k1, k2) for k1 in self.k1_values for k2 in self.k2_values]
        return [(k, 0) for k in self.k_values]

    def to_json(self):
        res = dataclasses.asdict(self)
        res["criteria"] = dataclasses.asdict(self.criteria)
        return res


@dataclasses.dataclass
class CampaignResult:
    config: ExperimentConfig
    records: pd.DataFrame
    summary: pd.DataFrame
    errors: typing.Dict[int, str] = dataclasses.field(default_factory=dict)


def figure_3(dataset, seed=0, samples=None, **kwargs) -> typing.List[ExperimentConfig]:
    """Direct and greedy indirect attacks, by established and fresh attackers, for k = 1..7."""
    samples = samples if samples is not None else configs.SAMPLES_PER_K.get(dataset, 20)
    res = []
    for mode in (attacks.DIRECT, attacks.INDIRECT):
        for cls in (configs.ESTABLISHED, configs.FRESH):
            res.append(ExperimentConfig(name=f"figure-3-{dataset}-{mode}-{cls}", dataset=dataset, mode=mode,
                                        criteria=attacks.SelectionCriteria(attacker_class=cls),
                                        samples=samples, seed=seed, **kwargs))
    return res


def figure_4(dataset, seed=0, samples=None, attacker_class=configs.ESTABLISHED, **kwargs) -> typing.List[ExperimentConfig]:
    samples = samples if samples is not None else configs.MIXED_SAMPLES.get(dataset, 12)
    return [ExperimentConfig(name=f"figure-4-{dataset}", dataset=dataset, mode=attacks.MIXED,
                             criteria=attacks.SelectionCriteria(attacker_class=attacker_class),
                             samples=samples, seed=seed, **kwargs)]


def table_2(dataset, seed=0, samples=None, **kwargs) -> typing.List[ExperimentConfig]:
    """The scaled indirect attack by sybils on weak targets, using the dataset's weak-target parameters."""
    if dataset not in configs.WEAK_TARGET_PARAMS:
        raise ValueError(f"no weak-target parameters for dataset {dataset!r}")
    block = configs.WEAK_TARGET_PARAMS[dataset]
    criteria = attacks.SelectionCriteria(target_indeg_below=block["max_indeg"] + 1,
                                         target_min_goodness=block["min_goodness"],
                                         attacker_class=configs.SYBIL)
    return [ExperimentConfig(name=f"table-2-{dataset}", dataset=dataset, mode=attacks.INDIRECT_SCALED,
                             k_values=(block["edges"],), criteria=criteria,
                             samples=samples if samples is not None else block["samples"],
                             seed=seed, **kwargs)]


PRESETS = {"figure-3": figure_3, "figure-4": figure_4, "table-2": table_2}


def load_graph(cfg: ExperimentConfig) -> wsn.Wsn:
    if cfg.dataset is not None:
        return loader.load_dataset(cfg.dataset, data_dir=cfg.data_dir)
    spec = cfg.generator
    if spec.seed is None:
        spec = dataclasses.replace(spec, seed=cfg.seed)
    return generators.generate(spec)


def run_sample(g: wsn.Wsn, scores: fga.FgaScores, cfg: ExperimentConfig, cell_idx, sample) -> typing.Dict:
    """One attack on a freshly drawn target and attacker set. The stream depends only on (seed, cell, sample)."""
    k1, k2 = cfg.cells()[cell_idx]
    n_attackers = k1 + k2
    rng = utils.rng_for(cfg.seed, cell_idx, sample)

    work = g.copy() if cfg.criteria.attacker_class == configs.SYBIL else g
    t = attacks.select_targets(work, scores, cfg.criteria, 1, rng)[0]
    attackers = attacks.select_attackers(work, scores, cfg.criteria, n_attackers, rng, exclude={t})
    fga_cfg = fga.FgaConfig()

    outcome = attacks.run_attack(cfg.mode, work, attackers, t, k1=k1, k2=k2, scale=cfg.scale,
                                 max_edges=cfg.max_edges, cfg=fga_cfg, warm=cfg.warm,
                                 scores_before=scores)
    delta = outcome.delta(t)
    return {
        "cell": cell_idx,
        "sample": sample,
        "mode": cfg.mode,
        "attacker_class": cfg.criteria.attacker_class,
        "k": n_attackers,
        "k1": k1 if cfg.mode == attacks.MIXED else n_attackers,
        "k2": k2,
        "target": work.label_of(t),
        "attackers": len(attackers),
        "moves": len(outcome.moves),
        "goodness_before": outcome.scores_before.g(t),
        "goodness_after": outcome.scores_after.g(t),
        "delta": delta,
        "delta_direct": outcome.extra.get("delta_direct", delta if cfg.mode == attacks.DIRECT else 0.0),
        "delta_indirect": outcome.extra.get("delta_indirect", 0.0 if cfg.mode == attacks.DIRECT else delta),
        "exhausted": outcome.exhausted,
    }


_WORKER_STATE = {}


def _init_worker(g, scores, cfg):
    _WORKER_STATE["args"] = (g, scores, cfg)


def _run_in_worker(cell_idx, sample):
    g, scores, cfg = _WORKER_STATE["args"]
    try:
        return run_sample(g, scores, cfg, cell_idx, sample)
    except utils.InsufficientDataError as e:
        return {"cell": cell_idx, "sample": sample, "error": str(e)}


def run_campaign(cfg: ExperimentConfig) -> CampaignResult:
    g = load_graph(cfg)
    scores = fga.compute_fga(g)
    cells = cfg.cells()
    utils.info(f"{cfg.name}: {len(cells)} cells x {cfg.samples} samples on {g}")

    tasks = [(c, s) for c in range(len(cells)) for s in range(cfg.samples)]
    results = []
    if cfg.workers > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(cfg.workers, initializer=_init_worker,
                                                    initargs=(g, scores, cfg)) as pool:
            futures = [pool.submit(_run_in_worker, c, s) for c, s in tasks]
            results = [f.result() for f in futures]
    else:
        _init_worker(g, scores, cfg)
        results = [_run_in_worker(c, s) for c, s in tasks]
        _WORKER_STATE.clear()

    errors = {}
    rows = []
    for res in sorted(results, key=lambda r: (r["cell"], r["sample"])):
        if "error" in res:
            if res["cell"] not in errors:
                errors[res["cell"]] = res["error"]
                utils.warn(f"{cfg.name}: cell {cells[res['cell']]}: {res['error']}")
        else:
            rows.append(res)

    records = pd.DataFrame(rows, columns=RECORD_COLUMNS)
    return CampaignResult(cfg, records, summarize(records), errors)


def summarize(records: pd.DataFrame) -> pd.DataFrame:
    """Per-cell statistics of delta; sd and the CI half-width are NaN for single-sample cells."""
    keys = ["cell", "k1", "k2"]
    rows = []
    for key, grp in records.groupby(keys, sort=True):
        vals = grp["delta"].astype(float)
        n = len(vals)
        sd = vals.std(ddof=1) if n > 1 else float("nan")
        rows.append(dict(zip(keys, key), **{
            "n": n,
            "mean": vals.mean(),
            "sd": sd,
            "min": vals.min(),
            "max": vals.max(),
            "median": vals.median(),
            "q75": vals.quantile(0.75),
            "ci_half_width": configs.CI_Z * sd / np.sqrt(n) if n > 1 else float("nan"),
            "mean_direct": grp["delta_direct"].astype(float).mean(),
            "mean_indirect": grp["delta_indirect"].astype(float).mean(),
        }))
    return pd.DataFrame(rows, columns=keys + SUMMARY_STATS + ["mean_direct", "mean_indirect"])


def report(results: typing.Sequence[CampaignResult], out_dir, format="csv") -> typing.List[str]:
    """Writes every result's records and summary, stamped with the campaign name and seed."""
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format: {format}")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for res in results:
        stem = os.path.join(out_dir, f"{res.config.name}-seed{res.config.seed}")
        if format == "csv":
            for part, df in (("records", res.records), ("summary", res.summary)):
                path = f"{stem}-{part}.csv"
                df.to_csv(path, index=False, float_format=configs.CSV_FLOAT_FORMAT,
                          na_rep=configs.UNDEFINED_MARKER)
                paths.append(path)
        else:
            path = f"{stem}.json"
            blob = {
                "config": res.config.to_json(),
                "records": res.records.to_dict(orient="records"),
                "summary": res.summary.to_dict(orient="records"),
                "errors": res.errors,
            }
            with open(path, "w") as f:
                f.write(utils.dumps(blob))
                f.write("\n")
            paths.append(path)
        utils.info(f"wrote {res.config.name} results to {stem}*")
    return paths

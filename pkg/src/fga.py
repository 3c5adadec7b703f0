import dataclasses
import typing

import numpy as np
import pandas as pd

import configs
import src.utils as utils
import src.wsn as wsn


@dataclasses.dataclass(frozen=True)
class FgaConfig:
    max_iterations: int = configs.FGA_MAX_ITERATIONS
    residual_tolerance: float = configs.FGA_RESIDUAL_TOLERANCE

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if not self.residual_tolerance > 0:
            raise ValueError(f"residual_tolerance must be positive, got {self.residual_tolerance}")

    @staticmethod
    def verification() -> 'FgaConfig':
        return FgaConfig(configs.VERIFY_MAX_ITERATIONS, configs.VERIFY_TOLERANCE)


@dataclasses.dataclass(frozen=True)
class FgaScores:
    fairness: np.ndarray
    goodness: np.ndarray
    iterations_run: int = 0
    max_residual: float = 0.0

    def __post_init__(self):
        if self.fairness.shape != self.goodness.shape:
            raise ValueError("fairness and goodness must cover the same nodes")
        self.fairness.setflags(write=False)
        self.goodness.setflags(write=False)

    def __len__(self):
        return len(self.fairness)

    def f(self, v) -> float:
        self._check_node(v)
        return float(self.fairness[v])

    def g(self, v) -> float:
        self._check_node(v)
        return float(self.goodness[v])

    def converged(self, cfg: FgaConfig = None) -> bool:
        cfg = cfg or FgaConfig()
        return self.max_residual < cfg.residual_tolerance

    def _check_node(self, v):
        if not (isinstance(v, (int, np.integer)) and 0 <= v < len(self.fairness)):
            raise KeyError(f"unknown node: {v}")


def goodness_pass(arrays: wsn.EdgeArrays, fairness: np.ndarray) -> np.ndarray:
    """Goodness of every node given the raters' fairness (held fixed)."""
    total = np.bincount(arrays.dst, weights=fairness[arrays.src] * arrays.w, minlength=arrays.n)
    indeg = arrays.indeg
    res = np.ones(arrays.n)
    rated = indeg > 0
    res[rated] = total[rated] / indeg[rated]
    return np.clip(res, -1.0, 1.0)


def fairness_pass(arrays: wsn.EdgeArrays, goodness: np.ndarray) -> np.ndarray:
    """Fairness of every node given the rated nodes' goodness (held fixed)."""
    err = np.abs(arrays.w - goodness[arrays.dst])
    total = np.bincount(arrays.src, weights=err, minlength=arrays.n)
    outdeg = arrays.outdeg
    res = np.ones(arrays.n)
    rating = outdeg > 0
    res[rating] = 1.0 - total[rating] / (2.0 * outdeg[rating])
    return np.clip(res, 0.0, 1.0)


def sweeps(arrays: wsn.EdgeArrays, fairness=None) -> typing.Iterator[typing.Tuple[np.ndarray, np.ndarray]]:
    """Yields (f, g) after each full sweep, forever. Starts from f = 1 unless told otherwise."""
    f = np.ones(arrays.n) if fairness is None else np.asarray(fairness, dtype=np.float64)
    while True:
        g = goodness_pass(arrays, f)
        f = fairness_pass(arrays, g)
        yield f, g


def _iterate(arrays: wsn.EdgeArrays, f0: np.ndarray, g0: np.ndarray, cfg: FgaConfig) -> FgaScores:
    f, g = f0, g0
    residual = float('inf')
    t = 0
    for t, (f_new, g_new) in enumerate(sweeps(arrays, fairness=f), start=1):
        residual = 0.0
        if arrays.n > 0:
            residual = max(float(np.max(np.abs(f_new - f))), float(np.max(np.abs(g_new - g))))
        f, g = f_new, g_new
        if residual < cfg.residual_tolerance or t >= cfg.max_iterations:
            break
    utils.debug(f"fga stopped after {t} sweeps, residual={residual:.3g}")
    return FgaScores(f, g, iterations_run=t, max_residual=residual)


def compute_fga(g: wsn.Wsn, cfg: FgaConfig = None) -> FgaScores:
    cfg = cfg or FgaConfig()
    arrays = g.edge_arrays()
    return _iterate(arrays, np.ones(arrays.n), np.ones(arrays.n), cfg)


def compute_fga_arrays(arrays: wsn.EdgeArrays, cfg: FgaConfig = None, warm: FgaScores = None) -> FgaScores:
    cfg = cfg or FgaConfig()
    if warm is None:
        return _iterate(arrays, np.ones(arrays.n), np.ones(arrays.n), cfg)
    f0, g0 = _extend(warm, arrays.n)
    return _iterate(arrays, f0, g0, cfg)


def recompute_after(g: wsn.Wsn, warm: FgaScores, cfg: FgaConfig = None) -> FgaScores:
    """Fixed point of an edited graph, iterating from scores of the graph before the edits.

    Nodes added since (Sybils) start from f = g = 1, just like a cold start.
    """
    return compute_fga_arrays(g.edge_arrays(), cfg=cfg, warm=warm)


def _extend(warm: FgaScores, n) -> typing.Tuple[np.ndarray, np.ndarray]:
    if len(warm) > n:
        raise ValueError(f"warm scores cover {len(warm)} nodes but the graph only has {n}")
    pad = n - len(warm)
    return (np.concatenate([warm.fairness, np.ones(pad)]),
            np.concatenate([warm.goodness, np.ones(pad)]))


def predict_weight(scores: FgaScores, u, v) -> float:
    return scores.f(u) * scores.g(v)


def write_scores_csv(scores: FgaScores, g: wsn.Wsn, path):
    if len(scores) != g.num_nodes():
        raise ValueError(f"scores cover {len(scores)} nodes, graph has {g.num_nodes()}")
    df = pd.DataFrame({
        "node_label": g.labels(),
        "fairness": scores.fairness,
        "goodness": scores.goodness,
    })
    df.to_csv(path, index=False, float_format=configs.CSV_FLOAT_FORMAT)
    utils.info(f"wrote scores for {len(df)} nodes to {path}")


def read_scores_csv(path) -> typing.Tuple[typing.List[str], FgaScores]:
    df = pd.read_csv(path, dtype={"node_label": str})
    missing = {"node_label", "fairness", "goodness"} - set(df.columns)
    if missing:
        raise ValueError(f"{path}: missing score columns {sorted(missing)}")
    f = df["fairness"].to_numpy(dtype=np.float64)
    g = df["goodness"].to_numpy(dtype=np.float64)
    if len(df) > 0 and (np.min(f) < 0 or np.max(f) > 1 or np.min(g) < -1 or np.max(g) > 1):
        raise ValueError(f"{path}: scores out of range")
    return list(df["node_label"]), FgaScores(f.copy(), g.copy())

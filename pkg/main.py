import argparse
import io
import sys

import pandas as pd

import configs
import src.attacks as attacks
import src.axioms as axioms
import src.bounds as bounds
import src.campaign as campaign
import src.fga as fga
import src.generators as generators
import src.loader as loader
import src.userdata as userdata
import src.utils as utils
import src.wsn as wsn


EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_INSUFFICIENT_DATA = 3
EXIT_INVARIANT_VIOLATION = 4


def _parse_param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, val = text.split("=", 1)
    for conv in (int, float):
        try:
            return key, conv(val)
        except ValueError:
            pass
    return key, val


def _add_graph_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--dataset", choices=sorted(configs.DATASETS), help="registered dataset name")
    src.add_argument("--input", help="rating CSV (source,target,rating[,time])")
    src.add_argument("--generator", help=f"generated graph kind: {generators.MIN_K_NEIGHBOUR}, "
                                         f"{generators.RANDOM_ERDOS} or one of {', '.join(generators.GADGET_KINDS)}")
    p.add_argument("--param", action="append", type=_parse_param, default=[],
                   help="generator parameter as key=value (repeatable)")
    p.add_argument("--r-max", type=float, default=1.0, help="rating half-width of --input files")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=configs.NAME_OF_PROJECT,
                                     description="Fairness/goodness scores and attacks on weighted signed networks.")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--data-dir", default=None, help=f"dataset directory (default: ${configs.DATA_DIR_ENV_VAR})")
    parser.add_argument("--out-dir", default=configs.DEFAULT_OUT_DIR)
    parser.add_argument("--format", choices=("csv", "json"), default="json")
    parser.add_argument("--cold", action="store_true", help="recompute scores from scratch instead of warm starts")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="compute fairness and goodness")
    _add_graph_args(p)
    p.add_argument("--out", default=None, help="score CSV path (default: <out-dir>/<graph>-scores.csv)")

    p = sub.add_parser("predict", help="predict the weight of an edge as f(u) * g(v)")
    _add_graph_args(p)
    p.add_argument("--scores", default=None, help="score CSV written by `compute`")
    p.add_argument("source")
    p.add_argument("target")

    p = sub.add_parser("stats", help="dataset statistics")
    _add_graph_args(p)

    p = sub.add_parser("axioms", help="check the eleven axioms on gadget graphs")
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("attack", help="run one attack")
    _add_graph_args(p)
    p.add_argument("--mode", choices=attacks.MODES, default=attacks.DIRECT)
    p.add_argument("--target", default=None, help="target label (default: drawn by the selection criteria)")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--k1", type=int, default=1)
    p.add_argument("--k2", type=int, default=1)
    p.add_argument("--scale", type=int, default=configs.SCALE)
    p.add_argument("--max-edges", type=int, default=configs.MAX_EDGES)
    p.add_argument("--attacker-class", choices=configs.ATTACKER_CLASSES, default=configs.ESTABLISHED)
    p.add_argument("--out", default=None)

    p = sub.add_parser("bounds", help="check attack-strength bounds empirically")
    _add_graph_args(p)
    p.add_argument("--scenario", choices=bounds.SCENARIOS, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, default=30, help="size of the generated network when no graph is given")
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("campaign", help="run a simulation campaign")
    p.add_argument("--preset", choices=sorted(campaign.PRESETS), default=None)
    _add_graph_args(p)
    p.add_argument("--mode", choices=attacks.MODES, default=attacks.DIRECT)
    p.add_argument("--k-values", type=int, nargs="+", default=list(configs.CAMPAIGN_K_VALUES))
    p.add_argument("--attacker-class", choices=configs.ATTACKER_CLASSES, default=configs.ESTABLISHED)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)

    return parser


def _graph(args) -> wsn.Wsn:
    if args.input:
        return loader.load_rating_csv(args.input, wsn.RatingScale(args.r_max))
    elif args.dataset:
        return loader.load_dataset(args.dataset, data_dir=args.data_dir)
    elif args.generator:
        return generators.generate(generators.GeneratorSpec(args.generator, dict(args.param), seed=args.seed))
    raise ValueError("one of --dataset, --input or --generator is required")


def _emit(args, blob, table: pd.DataFrame = None, path=None):
    if args.format == "csv" and table is not None:
        buf = io.StringIO()
        table.to_csv(buf, index=False, float_format=configs.CSV_FLOAT_FORMAT, na_rep=configs.UNDEFINED_MARKER)
        text = buf.getvalue()
    else:
        text = utils.dumps(blob) + "\n"
    if path:
        with open(path, "w") as f:
            f.write(text)
        utils.info(f"wrote {path}")
    else:
        sys.stdout.write(text)


def cmd_compute(args) -> int:
    g = _graph(args)
    scores = fga.compute_fga(g, fga.FgaConfig())
    if not scores.converged():
        utils.warn(f"not converged after {scores.iterations_run} sweeps (residual {scores.max_residual:.3g})")
    path = args.out
    if path is None:
        path = f"{userdata.get_out_dir(args.out_dir)}/{g.name or 'graph'}-scores.csv"
    fga.write_scores_csv(scores, g, path)
    _emit(args, {"nodes": g.num_nodes(), "edges": g.num_edges(), "iterations_run": scores.iterations_run,
                 "max_residual": scores.max_residual, "scores": path})
    return EXIT_OK


def cmd_predict(args) -> int:
    if args.scores:
        labels, scores = fga.read_scores_csv(args.scores)
        ids = {label: i for i, label in enumerate(labels)}
        for label in (args.source, args.target):
            if label not in ids:
                raise KeyError(f"unknown node label: {label!r}")
        u, v = ids[args.source], ids[args.target]
    else:
        g = _graph(args)
        scores = fga.compute_fga(g, fga.FgaConfig())
        u, v = g.node_for_label(args.source), g.node_for_label(args.target)
    _emit(args, {"source": args.source, "target": args.target, "prediction": fga.predict_weight(scores, u, v)})
    return EXIT_OK


def cmd_stats(args) -> int:
    g = _graph(args)
    stats = loader.compute_stats(g, fga.compute_fga(g, fga.FgaConfig()))
    _emit(args, stats.to_json())
    return EXIT_OK


def cmd_axioms(args) -> int:
    verdicts = axioms.run_axiom_suite(args.samples, seed=args.seed)
    table = pd.DataFrame([v.to_json() for v in verdicts])
    _emit(args, [v.to_json() for v in verdicts], table)
    return EXIT_OK if all(v.passed for v in verdicts) else EXIT_INVARIANT_VIOLATION


def cmd_attack(args) -> int:
    g = _graph(args)
    scores = fga.compute_fga(g, fga.FgaConfig())
    rng = utils.rng_for(args.seed)
    criteria = attacks.SelectionCriteria(attacker_class=args.attacker_class)
    work = g.copy()
    if args.target is not None:
        t = work.node_for_label(args.target)
    else:
        t = attacks.select_targets(work, scores, criteria, 1, rng)[0]
    n = args.k1 + args.k2 if args.mode == attacks.MIXED else args.k
    attackers = attacks.select_attackers(work, scores, criteria, n, rng, exclude={t})
    outcome = attacks.run_attack(args.mode, work, attackers, t, k1=args.k1, k2=args.k2,
                                 scale=args.scale, max_edges=args.max_edges,
                                 cfg=fga.FgaConfig(), warm=not args.cold, scores_before=scores)
    blob = outcome.to_json()
    blob["target_label"] = work.label_of(t)
    blob["attacker_labels"] = [outcome.graph.label_of(a) for a in attackers]
    blob["seed"] = args.seed
    _emit(args, blob, pd.DataFrame([m.to_json() for m in outcome.moves]), path=args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    g = None
    if args.scenario != bounds.STABILISER:
        if args.input or args.dataset or args.generator:
            g = _graph(args)
        elif args.scenario == bounds.INDIRECT_SYBIL:
            g = generators.generate_min_k_neighbour(args.n, args.k, seed=args.seed)
        else:
            g = generators.generate_random(args.n, 4 * args.n, seed=args.seed, positive_fraction=0.9)
    reports = bounds.verify_bound_empirically(g, args.scenario, args.trials, seed=args.seed, k=args.k)
    rows = [r.to_json() for r in reports]
    _emit(args, rows, pd.DataFrame(rows))
    return EXIT_OK if all(r.holds for r in reports) else EXIT_INVARIANT_VIOLATION


def cmd_campaign(args) -> int:
    common = {"warm": not args.cold, "workers": args.workers, "data_dir": args.data_dir}
    if args.preset is not None:
        if not args.dataset:
            raise ValueError("campaign presets need --dataset")
        cfgs = campaign.PRESETS[args.preset](args.dataset, seed=args.seed, samples=args.samples, **common)
    else:
        if not args.dataset and not args.generator:
            raise ValueError("campaigns need --preset, --dataset or --generator")
        source = {"dataset": args.dataset} if args.dataset else {
            "generator": generators.GeneratorSpec(args.generator, dict(args.param))}
        cfgs = [campaign.ExperimentConfig(name=f"{args.mode}-{args.attacker_class}", mode=args.mode,
                                          k_values=tuple(args.k_values),
                                          criteria=attacks.SelectionCriteria(attacker_class=args.attacker_class),
                                          samples=args.samples if args.samples is not None else 20,
                                          seed=args.seed, **source, **common)]
    results = [campaign.run_campaign(cfg) for cfg in cfgs]
    paths = campaign.report(results, userdata.get_out_dir(args.out_dir), format=args.format)
    for path in paths:
        print(path)
    if all(res.errors for res in results) and all(len(res.records) == 0 for res in results):
        return EXIT_INSUFFICIENT_DATA
    return EXIT_OK


_COMMANDS = {
    "compute": cmd_compute,
    "predict": cmd_predict,
    "stats": cmd_stats,
    "axioms": cmd_axioms,
    "attack": cmd_attack,
    "bounds": cmd_bounds,
    "campaign": cmd_campaign,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.verbose:
        configs.IS_DEBUG = True
    userdata.initialize(configs.get_storage_mode())
    try:
        return _COMMANDS[args.command](args)
    except (utils.InsufficientDataError, FileNotFoundError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_INSUFFICIENT_DATA
    except utils.InvariantViolation as e:
        print(f"ERROR: invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT_VIOLATION
    except (ValueError, KeyError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_INVALID_CONFIG


if __name__ == "__main__":
    sys.exit(main())

import dataclasses
import typing

import networkx as nx
import numpy as np

import configs
import src.gadgets as gadgets
import src.utils as utils
import src.wsn as wsn


MIN_K_NEIGHBOUR = "min-k-neighbour"
RANDOM_ERDOS = "random-erdos"
COMPLETE_POSITIVE = "complete-positive"
STABILISED_STAR = "stabilised-star"
ATTACK_DEMO = "attack-demo"
GOODNESS_GADGET = "goodness"
FAIRNESS_GADGET = "fairness"

GADGET_KINDS = (STABILISED_STAR, COMPLETE_POSITIVE, ATTACK_DEMO, GOODNESS_GADGET, FAIRNESS_GADGET)


@dataclasses.dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: typing.Dict[str, typing.Any] = dataclasses.field(default_factory=dict)
    seed: typing.Optional[int] = None


def generate(spec: GeneratorSpec) -> wsn.Wsn:
    p = dict(spec.params)
    if spec.kind == MIN_K_NEIGHBOUR:
        return generate_min_k_neighbour(p["n"], p["k"], seed=spec.seed)
    elif spec.kind == RANDOM_ERDOS:
        return generate_random(p["n"], p["m"], seed=spec.seed, positive_fraction=p.get("positive_fraction"))
    elif spec.kind in GADGET_KINDS:
        return generate_gadget(spec.kind, p, seed=spec.seed)
    else:
        raise ValueError(f"unrecognized generator kind: {spec.kind}")


def _weights(rng: np.random.Generator, count, positive_fraction=None) -> np.ndarray:
    w = rng.uniform(-1.0, 1.0, size=count)
    if positive_fraction is not None:
        if not utils.in_range(positive_fraction, 0, 1):
            raise ValueError(f"positive_fraction out of range: {positive_fraction}")
        sign = np.where(rng.random(size=count) < positive_fraction, 1.0, -1.0)
        w = sign * np.abs(w)
    return w


def generate_random(n, m, seed=None, positive_fraction=None) -> wsn.Wsn:
    """Uniform random digraph with n nodes and m edges (capped at n(n-1)), weights uniform in [-1, 1].

    positive_fraction: if given, each weight is positive with this probability.
    """
    if n < 0 or m < 0:
        raise ValueError(f"invalid size: n={n}, m={m}")
    m = min(m, n * (n - 1))
    rng = np.random.default_rng(seed)
    nxg = nx.gnm_random_graph(n, m, seed=int(rng.integers(2 ** 31)), directed=True)
    edges = sorted(nxg.edges())
    w = _weights(rng, len(edges), positive_fraction)
    return wsn.from_edges(n, [(u, v, float(x)) for (u, v), x in zip(edges, w)], name=f"random-{n}-{m}")


def _repair_pass(perms: np.ndarray, rng: np.random.Generator) -> int:
    """Swaps away self-loops and repeated targets, row by row. Returns how many swaps were made."""
    k, n = perms.shape
    swaps = 0
    offset = int(rng.integers(n))
    for step in range(n):
        i = (step + offset) % n
        seen = set()
        for j in np.roll(np.arange(k), int(rng.integers(k))):
            if perms[j, i] == i or perms[j, i] in seen:
                other = int(rng.integers(n))
                perms[j, i], perms[j, other] = perms[j, other], perms[j, i]
                swaps += 1
            seen.add(int(perms[j, i]))
    return swaps


def _random_regular_targets(n, k, rng: np.random.Generator) -> typing.Optional[np.ndarray]:
    # each row is a permutation, so every node is hit exactly k times
    perms = np.stack([rng.permutation(n) for _ in range(k)])
    for p in range(configs.MIN_K_REPAIR_PASSES):
        swaps = _repair_pass(perms, rng)
        if swaps == 0:
            utils.debug(f"min-{k}-neighbour-{n}: repaired after {p + 1} passes")
            return perms
    return None


def generate_min_k_neighbour(n, k, seed=None) -> wsn.Wsn:
    """Random digraph where every node rates exactly k others and is rated by exactly k others,
    weights uniform in [-1, 1].

    The targets are k random permutations, repaired until no node rates itself or anyone twice.
    If that keeps failing (only likely when n is barely above k) nodes are shuffled onto a
    circle and each one rates the next k along it.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if n <= k:
        raise ValueError(f"a minimum-{k}-neighbour network needs more than {k} nodes, got {n}")
    rng = np.random.default_rng(seed)
    targets = None if n == k + 1 else _random_regular_targets(n, k, rng)
    if targets is not None:
        edges = [(i, int(targets[j, i])) for i in range(n) for j in range(k)]
    else:
        if n > k + 1:
            utils.warn(f"min-{k}-neighbour-{n}: no repair after {configs.MIN_K_REPAIR_PASSES} passes, "
                       f"falling back to a shuffled circle")
        perm = rng.permutation(n)
        edges = [(int(perm[i]), int(perm[(i + j) % n])) for i in range(n) for j in range(1, k + 1)]
    edges.sort()
    w = _weights(rng, len(edges))
    return wsn.from_edges(n, [(u, v, float(x)) for (u, v), x in zip(edges, w)], name=f"min-{k}-neighbour-{n}")


def generate_complete_positive(n) -> wsn.Wsn:
    if n < 1:
        raise ValueError(f"need at least one node, got {n}")
    nxg = nx.complete_graph(n, create_using=nx.DiGraph)
    return wsn.from_edges(n, [(u, v, 1.0) for u, v in sorted(nxg.edges())], name=f"complete-positive-{n}")


def attack_demo(variant="a") -> wsn.Wsn:
    """The five-node demo network: 2 and 3 rate 1, 2 rates 4, all +1.

    Variant "b" adds node 5 rating 1 with -1 (direct), variant "c" adds node 5 rating 4 with -1 (indirect).
    """
    if variant not in ("a", "b", "c"):
        raise ValueError(f"unknown attack-demo variant: {variant}")
    g = wsn.Wsn(f"attack-demo-{variant}")
    for label in ("1", "2", "3", "4"):
        g.add_node(label)
    n = g.node_for_label
    g.add_edge(n("2"), n("1"), 1.0)
    g.add_edge(n("3"), n("1"), 1.0)
    g.add_edge(n("2"), n("4"), 1.0)
    if variant != "a":
        s = g.add_node("5")
        g.add_edge(s, n("1") if variant == "b" else n("4"), -1.0)
    return g


def stabilised_star(k, l, delta=0.0, aux_sinks=configs.GADGET_AUX_SINKS,
                    anchors=configs.GADGET_ANCHORS) -> typing.Tuple[gadgets.GoodnessGadget, float]:
    """Node "target" rated +1 by k influencers of fairness 1 - delta and by l free stabilisers.

    Returns the gadget and the fairness drop actually realized. When 1 - delta can't be pinned,
    the influencers get the lowest fairness that can, so the realized drop is smaller.
    """
    if k < 0 or l < 0 or k + l < 1:
        raise ValueError(f"need k, l >= 0 and k + l >= 1, got k={k}, l={l}")
    if not utils.in_range(delta, 0, 1):
        raise ValueError(f"delta out of range: {delta}")

    def groups(f):
        return [gadgets.RaterGroup(k, 1.0, f), gadgets.RaterGroup(l, 1.0, None)]

    lo, hi = 1.0 - delta, 1.0
    if not gadgets.is_realizable(groups(lo), aux_sinks, anchors):
        for _ in range(60):
            mid = (lo + hi) / 2
            if gadgets.is_realizable(groups(mid), aux_sinks, anchors):
                hi = mid
            else:
                lo = mid
        lo = hi
        utils.debug(f"influencer fairness {1.0 - delta} isn't realizable, using {lo}")

    gadget = gadgets.build_goodness_gadget(groups(lo), aux_sinks=aux_sinks, anchors=anchors,
                                           name=f"stabilised-star-{k}-{l}")
    return gadget, 1.0 - lo


def shuffle_ids(g: wsn.Wsn, seed) -> wsn.Wsn:
    """Same network with node ids permuted. Labels follow their nodes."""
    rng = np.random.default_rng(seed)
    res = wsn.Wsn(g.name)
    new_id = {}
    for old in rng.permutation(g.num_nodes()):
        new_id[int(old)] = res.add_node(g.label_of(int(old)))
    for u, v, w in sorted((new_id[u], new_id[v], w) for u, v, w in g.edges()):
        res.add_edge(u, v, w)
    return res


def generate_gadget(kind, params=None, seed=None) -> wsn.Wsn:
    """Gadget graphs by name. The node of interest is labelled "target" (or "rater" for fairness gadgets).

    Gadgets are deterministic; a seed only shuffles the node ids.
    """
    p = dict(params or {})
    if kind == STABILISED_STAR:
        gadget, _ = stabilised_star(int(p.get("k", 1)), int(p.get("l", 0)), float(p.get("delta", 0.0)))
        g = gadget.graph
    elif kind == COMPLETE_POSITIVE:
        g = generate_complete_positive(int(p.get("n", 4)))
    elif kind == ATTACK_DEMO:
        g = attack_demo(p.get("variant", "a"))
    elif kind == GOODNESS_GADGET:
        g = gadgets.goodness_gadget(float(p["f0"]), float(p["omega0"]),
                                    raters=int(p.get("raters", configs.GADGET_RATERS))).graph
    elif kind == FAIRNESS_GADGET:
        g = gadgets.fairness_gadget(float(p["d"]), size=int(p.get("size", configs.GADGET_RATERS))).graph
    else:
        raise ValueError(f"unrecognized gadget kind: {kind}")
    return g if seed is None else shuffle_ids(g, seed)

import dataclasses
import itertools
import math
import typing

import numpy as np

import configs
import src.fga as fga
import src.utils as utils
import src.wsn as wsn


EDGE_ADDITION = wsn.EDGE_ADDITION
WEIGHT_UPDATE = wsn.WEIGHT_UPDATE

DECREASE = "decrease"
INCREASE = "increase"

DIRECT = "direct"
INDIRECT = "indirect"
INDIRECT_SCALED = "indirect-scaled"
MIXED = "mixed"
EXHAUSTIVE = "exhaustive"
MODES = (DIRECT, INDIRECT, INDIRECT_SCALED, MIXED, EXHAUSTIVE)


@dataclasses.dataclass(frozen=True)
class AttackMove:
    kind: str
    attacker: int
    rated: int
    weight: float

    def apply(self, g: wsn.Wsn) -> str:
        return g.rate(self.attacker, self.rated, self.weight)

    def to_json(self):
        return {"kind": self.kind, "attacker": self.attacker, "rated": self.rated, "weight": self.weight}


@dataclasses.dataclass
class AttackProblem:
    graph: wsn.Wsn
    attackers: typing.Sequence[int]
    targets: typing.Sequence[int] = ()
    target_pairs: typing.Sequence[typing.Tuple[int, int]] = ()
    intermediaries: typing.Optional[typing.Sequence[int]] = None  # None: any node
    budget: int = 1
    threshold: float = 0.0
    direction: str = DECREASE

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.budget < 0:
            raise ValueError(f"budget must be non-negative, got {self.budget}")
        if self.direction not in (DECREASE, INCREASE):
            raise ValueError(f"unknown direction: {self.direction}")
        utils.check_weight(self.threshold, what="threshold")
        if bool(self.targets) == bool(self.target_pairs):
            raise ValueError("exactly one of targets or target_pairs must be given")
        attackers = set(self.attackers)
        for v in itertools.chain(self.attackers, self.targets, *self.target_pairs, self.intermediaries or ()):
            if not self.graph.has_node(v):
                raise KeyError(f"unknown node: {v}")
        if attackers & set(self.targets):
            raise ValueError(f"attackers and targets overlap: {sorted(attackers & set(self.targets))}")
        for u, v in self.target_pairs:
            if u == v or self.graph.has_edge(u, v) or self.graph.has_edge(v, u):
                raise ValueError(f"target pair ({u}, {v}) must be two distinct, unlinked nodes")
            if u in attackers or v in attackers:
                raise ValueError(f"target pair ({u}, {v}) contains an attacker")

    def move_pairs(self) -> typing.List[typing.Tuple[int, int]]:
        rated = self.graph.nodes() if self.intermediaries is None else self.intermediaries
        rated = utils.sorted_unique(rated)
        return [(a, i) for a in utils.sorted_unique(self.attackers) for i in rated if a != i]

    def watched(self) -> typing.List[int]:
        if self.targets:
            return utils.sorted_unique(self.targets)
        return utils.sorted_unique(itertools.chain(*self.target_pairs))

    def objective(self, scores: fga.FgaScores) -> float:
        """The worst target's value: largest for decrease problems, smallest for increase problems."""
        if self.targets:
            vals = [scores.g(t) for t in self.targets]
        elif self.direction == DECREASE:
            vals = [min(fga.predict_weight(scores, u, v), fga.predict_weight(scores, v, u))
                    for u, v in self.target_pairs]
        else:
            vals = [max(fga.predict_weight(scores, u, v), fga.predict_weight(scores, v, u))
                    for u, v in self.target_pairs]
        return max(vals) if self.direction == DECREASE else min(vals)

    def met(self, value) -> bool:
        return value < self.threshold if self.direction == DECREASE else value > self.threshold


@dataclasses.dataclass
class AttackOutcome:
    targets: typing.List[int]
    moves: typing.List[AttackMove]
    scores_before: fga.FgaScores
    scores_after: fga.FgaScores
    graph: wsn.Wsn  # the attacked graph
    threshold: typing.Optional[float] = None
    direction: str = DECREASE
    exhausted: bool = False
    feasible: typing.Optional[bool] = None
    extra: typing.Dict[str, typing.Any] = dataclasses.field(default_factory=dict)

    @property
    def delta_goodness(self) -> typing.Dict[int, float]:
        return {t: self.scores_after.g(t) - self.scores_before.g(t) for t in self.targets}

    @property
    def success(self) -> typing.Dict[int, bool]:
        if self.threshold is None:
            if self.direction == DECREASE:
                return {t: d < 0 for t, d in self.delta_goodness.items()}
            return {t: d > 0 for t, d in self.delta_goodness.items()}
        if self.direction == DECREASE:
            return {t: self.scores_after.g(t) < self.threshold for t in self.targets}
        return {t: self.scores_after.g(t) > self.threshold for t in self.targets}

    def delta(self, t=None) -> float:
        t = self.targets[0] if t is None else t
        return self.delta_goodness[t]

    def to_json(self):
        return {
            "targets": self.targets,
            "moves": [m.to_json() for m in self.moves],
            "goodness_before": {t: self.scores_before.g(t) for t in self.targets},
            "goodness_after": {t: self.scores_after.g(t) for t in self.targets},
            "delta_goodness": self.delta_goodness,
            "success": self.success,
            "exhausted": self.exhausted,
            "feasible": self.feasible,
            "extra": self.extra,
        }


class _Scorer:
    """Runs FGA on candidate graphs, warm-started from the last committed scores unless cold."""

    def __init__(self, cfg: fga.FgaConfig = None, warm=True):
        self.cfg = cfg or fga.FgaConfig()
        self.warm = warm

    def score(self, arrays: wsn.EdgeArrays, base: typing.Optional[fga.FgaScores]) -> fga.FgaScores:
        return fga.compute_fga_arrays(arrays, self.cfg, warm=base if self.warm else None)


def _check_attackers(g: wsn.Wsn, attackers, t):
    if not g.has_node(t):
        raise KeyError(f"unknown target: {t}")
    for a in attackers:
        if not g.has_node(a):
            raise KeyError(f"unknown attacker: {a}")
    if t in set(attackers):
        raise ValueError(f"target {t} can't be one of its own attackers")


def _before(g, scores_before, scorer) -> fga.FgaScores:
    if scores_before is not None:
        if len(scores_before) > g.num_nodes():
            raise ValueError("scores_before covers more nodes than the graph")
        if len(scores_before) == g.num_nodes():
            return scores_before
        return scorer.score(g.edge_arrays(), scores_before)
    return fga.compute_fga(g, scorer.cfg)


def direct_attack(g: wsn.Wsn, attackers: typing.Sequence[int], t,
                  cfg: fga.FgaConfig = None, warm=True, scores_before=None) -> AttackOutcome:
    """Every attacker rates the target -1. Attackers that already rate it re-rate it instead."""
    _check_attackers(g, attackers, t)
    scorer = _Scorer(cfg, warm)
    work = g.copy()
    before = _before(work, scores_before, scorer)

    moves = []
    for a in utils.sorted_unique(attackers):
        kind = work.rate(a, t, -1.0)
        moves.append(AttackMove(kind, a, t, -1.0))

    after = scorer.score(work.edge_arrays(), before) if moves else before
    return AttackOutcome([t], moves, before, after, work, extra={"mode": DIRECT})


def by_fairness(attackers, scores: fga.FgaScores) -> typing.List[int]:
    return sorted(set(attackers), key=lambda a: (-scores.f(a), a))


def indirect_candidates(g: wsn.Wsn, t, attacker) -> typing.List[int]:
    """Nodes an indirect attacker on t may rate: successors of t's predecessors, other than t and itself."""
    res = set()
    for n1 in g.pred(t):
        res.update(g.succ(n1))
    res.discard(t)
    res.discard(attacker)
    return sorted(res)


def _best_indirect_move(work: wsn.Wsn, a, t, current, scorer, weights):
    """(goodness, n2, w, scores) of the candidate edge from a that drives g(t) lowest, or None."""
    arrays = work.edge_arrays()
    best = None
    for n2 in indirect_candidates(work, t, a):
        for w in weights:
            scores = scorer.score(arrays.with_rating(a, n2, w), current)
            g_t = scores.g(t)
            if best is None or g_t < best[0]:
                best = (g_t, n2, w, scores)
    return best


def indirect_attack_greedy(g: wsn.Wsn, attackers: typing.Sequence[int], t,
                           cfg: fga.FgaConfig = None, warm=True, scores_before=None,
                           weights=configs.GREEDY_WEIGHTS) -> AttackOutcome:
    """Greedy indirect attack: one edge per attacker, fairest attacker first, each picking the
    (successor of a predecessor of t, weight) pair that minimizes the recomputed goodness of t."""
    _check_attackers(g, attackers, t)
    scorer = _Scorer(cfg, warm)
    work = g.copy()
    before = _before(work, scores_before, scorer)
    current = before

    moves = []
    exhausted = False
    for a in by_fairness(attackers, before):
        best = _best_indirect_move(work, a, t, current, scorer, weights)
        if best is None:
            exhausted = True
            utils.debug(f"no indirect candidates for attacker {a} on target {t}")
            continue
        _, n2, w, current = best
        kind = work.rate(a, n2, w)
        moves.append(AttackMove(kind, a, n2, w))

    return AttackOutcome([t], moves, before, current, work, exhausted=exhausted, extra={"mode": INDIRECT})


def scaled_batch_size(indeg_n2, scale, max_edges, remaining) -> int:
    return max(0, min(scale * indeg_n2, max_edges, remaining))


def indirect_attack_scaled(g: wsn.Wsn, attackers: typing.Sequence[int], t,
                           scale=configs.SCALE, max_edges=configs.MAX_EDGES,
                           cfg: fga.FgaConfig = None, warm=True, scores_before=None,
                           weights=configs.GREEDY_WEIGHTS) -> AttackOutcome:
    """Like the greedy attack, but each pick is copied by a batch of the next attackers in line,
    sized to scale * indeg(n2) and capped by max_edges and the attackers left."""
    if scale < 1 or max_edges < 1:
        raise ValueError(f"scale and max_edges must be positive, got {scale}, {max_edges}")
    _check_attackers(g, attackers, t)
    scorer = _Scorer(cfg, warm)
    work = g.copy()
    before = _before(work, scores_before, scorer)
    current = before

    order = by_fairness(attackers, before)
    moves = []
    batches = []
    exhausted = False
    i = 0
    while i < len(order):
        a = order[i]
        best = _best_indirect_move(work, a, t, current, scorer, weights)
        if best is None:
            exhausted = True
            i += 1
            continue
        _, n2, w, current = best
        batch = scaled_batch_size(work.indeg(n2), scale, max_edges, len(order) - i)
        for b in order[i:i + batch]:
            if b == n2:
                continue
            kind = work.rate(b, n2, w)
            moves.append(AttackMove(kind, b, n2, w))
        batches.append({"rated": n2, "weight": w, "size": batch})
        i += max(batch, 1)
        if batch > 1:
            current = scorer.score(work.edge_arrays(), current)

    return AttackOutcome([t], moves, before, current, work, exhausted=exhausted,
                         extra={"mode": INDIRECT_SCALED, "batches": batches})


def mixed_attack(g: wsn.Wsn, attackers: typing.Sequence[int], t, k1, k2,
                 cfg: fga.FgaConfig = None, warm=True, scores_before=None) -> AttackOutcome:
    """The first k1 attackers attack directly, the next k2 indirectly on the resulting graph."""
    attackers = list(attackers)
    if len(set(attackers)) != len(attackers):
        raise ValueError("attacker assignment contains duplicates")
    if k1 < 0 or k2 < 0 or k1 + k2 > len(attackers):
        raise ValueError(f"k1 + k2 = {k1 + k2} attackers requested, only {len(attackers)} given")

    direct = direct_attack(g, attackers[:k1], t, cfg=cfg, warm=warm, scores_before=scores_before)
    indirect = indirect_attack_greedy(direct.graph, attackers[k1:k1 + k2], t, cfg=cfg, warm=warm,
                                      scores_before=direct.scores_after)

    delta_direct = direct.delta(t)
    delta_total = indirect.scores_after.g(t) - direct.scores_before.g(t)
    return AttackOutcome([t], direct.moves + indirect.moves, direct.scores_before, indirect.scores_after,
                         indirect.graph, exhausted=indirect.exhausted,
                         extra={"mode": MIXED, "k1": k1, "k2": k2,
                                "delta_direct": delta_direct,
                                "delta_indirect": delta_total - delta_direct,
                                "delta_total": delta_total})


def inject_sybil(g: wsn.Wsn, rated, w, label=None) -> typing.Tuple[wsn.Wsn, int]:
    res = g.copy()
    s = res.add_node(label)
    res.add_edge(s, rated, w)
    return res, s


def count_move_sets(num_pairs, num_weights, k) -> int:
    return sum(math.comb(num_pairs, j) * num_weights ** j for j in range(0, k + 1))


def solve_exhaustive(p: AttackProblem, weight_grid=(-1.0, 1.0), cfg: fga.FgaConfig = None) -> AttackOutcome:
    """Optimal attack by brute force over every set of at most `budget` moves."""
    weight_grid = [utils.check_weight(w) for w in weight_grid]
    cfg = cfg or fga.FgaConfig()
    pairs = p.move_pairs()
    total = count_move_sets(len(pairs), len(weight_grid), p.budget)
    if total > configs.EXHAUSTIVE_MAX_CANDIDATES:
        raise utils.InstanceTooLargeError(f"{total} candidate move sets exceed the limit of "
                                          f"{configs.EXHAUSTIVE_MAX_CANDIDATES}")

    base = p.graph.edge_arrays()
    before = fga.compute_fga(p.graph, cfg)
    best_val, best_moves, best_scores = p.objective(before), (), before
    better = (lambda x, y: x < y) if p.direction == DECREASE else (lambda x, y: x > y)

    for size in range(1, p.budget + 1):
        for chosen in itertools.combinations(pairs, size):
            for ws in itertools.product(weight_grid, repeat=size):
                arrays = base
                for (a, i), w in zip(chosen, ws):
                    arrays = arrays.with_rating(a, i, w)
                scores = fga.compute_fga_arrays(arrays, cfg, warm=before)
                val = p.objective(scores)
                if better(val, best_val):
                    best_val, best_scores = val, scores
                    best_moves = tuple(zip(chosen, ws))

    work = p.graph.copy()
    moves = []
    for (a, i), w in best_moves:
        moves.append(AttackMove(work.rate(a, i, w), a, i, w))
    feasible = p.met(best_val)
    utils.debug(f"exhaustive search over {total} move sets: objective={best_val:.6g}, feasible={feasible}")
    return AttackOutcome(p.watched(), moves, before, best_scores, work,
                         threshold=p.threshold if p.targets else None, direction=p.direction,
                         feasible=feasible,
                         extra={"mode": EXHAUSTIVE, "objective": best_val, "evaluated": total,
                                "direction": p.direction})


@dataclasses.dataclass(frozen=True)
class SelectionCriteria:
    target_min_indeg_exclusive: int = configs.TARGET_MIN_INDEG_EXCLUSIVE
    target_indeg_below: int = configs.TARGET_INDEG_BELOW
    target_min_goodness: float = configs.TARGET_MIN_GOODNESS
    attacker_class: str = configs.ESTABLISHED
    established_outdeg_above: int = configs.ESTABLISHED_OUTDEG_ABOVE
    established_fairness_above: float = configs.ESTABLISHED_FAIRNESS_ABOVE
    fresh_min_indeg_exclusive: int = configs.FRESH_MIN_INDEG_EXCLUSIVE
    fresh_indeg_below: int = configs.FRESH_INDEG_BELOW

    def __post_init__(self):
        if self.attacker_class not in configs.ATTACKER_CLASSES:
            raise ValueError(f"unknown attacker class: {self.attacker_class}")

    def is_target(self, g: wsn.Wsn, scores: fga.FgaScores, v) -> bool:
        return (self.target_min_indeg_exclusive < g.indeg(v) < self.target_indeg_below
                and scores.g(v) >= self.target_min_goodness)

    def is_attacker(self, g: wsn.Wsn, scores: fga.FgaScores, v) -> bool:
        if self.attacker_class == configs.ESTABLISHED:
            return g.outdeg(v) > self.established_outdeg_above and scores.f(v) > self.established_fairness_above
        elif self.attacker_class == configs.FRESH:
            return self.fresh_min_indeg_exclusive < g.indeg(v) < self.fresh_indeg_below and g.outdeg(v) == 0
        else:
            return g.indeg(v) == 0 and g.outdeg(v) == 0


def _sample(pool, n, rng: np.random.Generator, what) -> typing.List[int]:
    if n < 0:
        raise ValueError(f"can't select {n} {what}")
    if len(pool) < n:
        raise utils.InsufficientDataError(f"only {len(pool)} qualifying {what}, {n} requested")
    if n == 0:
        return []
    picked = rng.choice(len(pool), size=n, replace=False)
    return [pool[int(i)] for i in picked]


def select_targets(g: wsn.Wsn, scores: fga.FgaScores, c: SelectionCriteria, n, rng=None,
                   exclude=()) -> typing.List[int]:
    rng = rng if rng is not None else np.random.default_rng()
    exclude = set(exclude)
    pool = [v for v in g.nodes() if v not in exclude and c.is_target(g, scores, v)]
    return _sample(pool, n, rng, "targets")


def select_attackers(g: wsn.Wsn, scores: fga.FgaScores, c: SelectionCriteria, n, rng=None,
                     exclude=()) -> typing.List[int]:
    """Attackers of the criteria's class. Sybil attackers are fresh nodes added to g in place."""
    rng = rng if rng is not None else np.random.default_rng()
    if c.attacker_class == configs.SYBIL:
        if n < 0:
            raise ValueError(f"can't select {n} attackers")
        return [g.add_node(f"sybil-{g.num_nodes()}") for _ in range(n)]
    exclude = set(exclude)
    pool = [v for v in g.nodes() if v not in exclude and c.is_attacker(g, scores, v)]
    return _sample(pool, n, rng, f"{c.attacker_class} attackers")


def run_attack(mode, g: wsn.Wsn, attackers, t, k1=0, k2=0, scale=configs.SCALE, max_edges=configs.MAX_EDGES,
               cfg: fga.FgaConfig = None, warm=True, scores_before=None) -> AttackOutcome:
    if mode == DIRECT:
        return direct_attack(g, attackers, t, cfg=cfg, warm=warm, scores_before=scores_before)
    elif mode == INDIRECT:
        return indirect_attack_greedy(g, attackers, t, cfg=cfg, warm=warm, scores_before=scores_before)
    elif mode == INDIRECT_SCALED:
        return indirect_attack_scaled(g, attackers, t, scale=scale, max_edges=max_edges,
                                      cfg=cfg, warm=warm, scores_before=scores_before)
    elif mode == MIXED:
        return mixed_attack(g, attackers, t, k1, k2, cfg=cfg, warm=warm, scores_before=scores_before)
    elif mode == EXHAUSTIVE:
        problem = AttackProblem(g, list(attackers), targets=[t], budget=len(attackers))
        return solve_exhaustive(problem, cfg=cfg)
    else:
        raise ValueError(f"unknown attack mode: {mode}")

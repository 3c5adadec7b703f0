import dataclasses
import math
import typing

import numpy as np

import configs
import src.attacks as attacks
import src.fga as fga
import src.generators as generators
import src.utils as utils
import src.wsn as wsn


DIRECT_SYBIL = "direct-sybil"
INDIRECT_SYBIL = "indirect-sybil"
STABILISER = "stabiliser"
DIRECT_FLIP = "direct-flip"
SCENARIOS = (DIRECT_SYBIL, INDIRECT_SYBIL, STABILISER, DIRECT_FLIP)

# grid for the stabiliser scenario
STABILISER_KS = (1, 2, 3, 4, 5)
STABILISER_LS = (0, 5, 50, 200)
STABILISER_DELTAS = (0.1, 0.5, 1.0)


@dataclasses.dataclass(frozen=True)
class MinKNeighbourCert:
    k: int
    holds: bool
    violations: typing.Tuple[typing.Tuple[int, str], ...]


@dataclasses.dataclass(frozen=True)
class BoundReport:
    bound_value: float
    observed_delta: float
    satisfied: bool
    context: typing.Dict[str, typing.Any]

    @staticmethod
    def of(bound_value, observed_delta, slack=configs.BOUND_SLACK, **context) -> 'BoundReport':
        satisfied = abs(observed_delta) <= bound_value + slack
        return BoundReport(float(bound_value), float(observed_delta), bool(satisfied), context)

    def to_json(self):
        res = {"bound_value": self.bound_value, "observed_delta": self.observed_delta, "satisfied": self.satisfied}
        res.update(self.context)
        return res

    @property
    def holds(self) -> bool:
        return self.satisfied


@dataclasses.dataclass(frozen=True)
class FlipReport:
    """Outcome of a direct attack by budget + 1 attackers: did g(t) change sign?"""
    budget: int
    observed_delta: float
    flipped: bool
    context: typing.Dict[str, typing.Any]

    def to_json(self):
        res = {"budget": self.budget, "observed_delta": self.observed_delta, "flipped": self.flipped}
        res.update(self.context)
        return res

    @property
    def holds(self) -> bool:
        return self.flipped


TrialReport = typing.Union[BoundReport, FlipReport]


def check_min_k_neighbour(g: wsn.Wsn, k) -> MinKNeighbourCert:
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    mass = np.zeros(g.num_nodes())
    for _, v, w in g.edges():
        mass[v] += abs(w)
    violations = []
    for v in g.nodes():
        if g.indeg(v) < k:
            violations.append((v, "indeg"))
        if g.outdeg(v) < k:
            violations.append((v, "outdeg"))
        if mass[v] > k + 1e-12:
            violations.append((v, "weight-mass"))
    return MinKNeighbourCert(k, len(violations) == 0, tuple(violations))


def indirect_sybil_bound(g: wsn.Wsn, intermediary, k, cert: MinKNeighbourCert = None) -> float:
    cert = cert if cert is not None else check_min_k_neighbour(g, k)
    if cert.k != k or not cert.holds:
        raise ValueError(f"the graph is not a minimum-{k}-neighbour network "
                         f"({len(cert.violations)} violations)")
    return 2.0 / ((g.indeg(intermediary) + 1) * k)


def direct_sybil_bound(g: wsn.Wsn, t) -> float:
    d = g.indeg(t)
    if d == 0:
        raise ValueError(f"node {t} has no raters, a first rating sets its goodness outright")
    return 2.0 / d


def direct_flip_budget(scores: fga.FgaScores, g: wsn.Wsn, t) -> int:
    """ceil(2 g(t) indeg(t)); more attackers than this, each of fairness >= 1/2, flip the sign of g(t)."""
    g_t = scores.g(t)
    if g_t <= 0:
        raise ValueError(f"goodness of {t} is already {g_t}, nothing to flip")
    return max(1, math.ceil(2 * g_t * g.indeg(t) - configs.BOUND_SLACK))


def stabiliser_lower_bound(k, l, delta) -> float:
    if k < 0 or l < 0:
        raise ValueError(f"k and l must be non-negative, got {k}, {l}")
    if k + l == 0:
        raise ValueError("need at least one rater")
    if not utils.in_range(delta, 0, 1):
        raise ValueError(f"delta out of range: {delta}")
    return 1.0 - 2.0 * delta * k / (k + l)


def two_hop(g: wsn.Wsn, t) -> typing.List[int]:
    return attacks.indirect_candidates(g, t, t)


def _pick(pool, rng: np.random.Generator):
    return pool[int(rng.integers(len(pool)))]


def _direct_sybil_trial(g, before, cfg, rng, trial):
    pool = [v for v in g.nodes() if g.indeg(v) > 0]
    if not pool:
        raise ValueError("direct sybil trials need a node with at least one rater")
    t = _pick(pool, rng)
    w = float(rng.choice(configs.SYBIL_TRIAL_WEIGHTS))
    bound = direct_sybil_bound(g, t)
    attacked, s = attacks.inject_sybil(g, t, w)
    after = fga.recompute_after(attacked, before, cfg)
    return BoundReport.of(bound, after.g(t) - before.g(t), trial=trial, target=t, intermediary=t, weight=w)


def _indirect_sybil_trial(g, before, cfg, rng, trial, k, cert):
    pool = [v for v in g.nodes() if g.indeg(v) > 0 and two_hop(g, v)]
    if not pool:
        raise ValueError("indirect sybil trials need a target with a two-hop neighbour")
    t = _pick(pool, rng)
    i = _pick(two_hop(g, t), rng)
    w = float(rng.choice(configs.SYBIL_TRIAL_WEIGHTS))
    bound = indirect_sybil_bound(g, i, k, cert=cert)
    attacked, s = attacks.inject_sybil(g, i, w)
    after = fga.recompute_after(attacked, before, cfg)
    return BoundReport.of(bound, after.g(t) - before.g(t), trial=trial, target=t, intermediary=i, k=k, weight=w)


def stabiliser_report(k, l, delta, cfg=None, trial=0) -> BoundReport:
    """Measured drop of the star's goodness against the weak-influence bound for the realized fairness drop."""
    cfg = cfg or fga.FgaConfig.verification()
    gadget, realized = generators.stabilised_star(k, l, delta)
    scores = fga.compute_fga(gadget.graph, cfg)
    g_x = scores.g(gadget.target)
    lower = stabiliser_lower_bound(k, l, realized)
    return BoundReport.of(1.0 - lower, 1.0 - g_x, trial=trial, k=k, l=l, delta=delta,
                          realized_delta=realized, goodness=g_x, lower_bound=lower)


def _flip_trial(g, before, cfg, rng, trial, max_attempts=50):
    targets = [v for v in g.nodes() if g.indeg(v) > 0 and before.g(v) > 0]
    if not targets:
        raise ValueError("no node with positive goodness to flip")
    for attempt in range(max_attempts):
        t = _pick(targets, rng)
        budget = direct_flip_budget(before, g, t)
        raters = g.pred(t)
        pool = [v for v in g.nodes() if v != t and v not in raters and before.f(v) >= 0.5]
        if len(pool) < budget + 1:
            continue
        attackers = [pool[int(i)] for i in rng.choice(len(pool), size=budget + 1, replace=False)]
        outcome = attacks.direct_attack(g, attackers, t, cfg=cfg, scores_before=before)
        if min(outcome.scores_after.f(a) for a in attackers) < 0.5:
            utils.debug(f"flip trial {trial}: an attacker fell below fairness 1/2, resampling")
            continue
        g_after = outcome.scores_after.g(t)
        return FlipReport(int(budget), float(outcome.delta(t)), bool(g_after < 0),
                          {"trial": trial, "target": t, "attackers": len(attackers),
                            "goodness_before": before.g(t), "goodness_after": g_after,
                            "attempts": attempt + 1})
    raise utils.InsufficientDataError(f"no qualifying flip instance found in {max_attempts} attempts")


def verify_bound_empirically(g: typing.Optional[wsn.Wsn], scenario, trials, seed=None, k=None,
                             cfg: fga.FgaConfig = None) -> typing.List[TrialReport]:
    """Runs `trials` attacks of the given scenario and reports each observed change against its bound.

    The stabiliser scenario builds its own star gadgets and ignores g.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario: {scenario}")
    if trials < 0:
        raise ValueError(f"trials must be non-negative, got {trials}")
    cfg = cfg or fga.FgaConfig.verification()
    seed = 0 if seed is None else seed

    if scenario == STABILISER:
        reports = []
        for trial in range(trials):
            rng = utils.rng_for(seed, trial)
            reports.append(stabiliser_report(int(rng.choice(STABILISER_KS)), int(rng.choice(STABILISER_LS)),
                                             float(rng.choice(STABILISER_DELTAS)), cfg=cfg, trial=trial))
        return _summarize(scenario, reports)

    if g is None:
        raise ValueError(f"scenario {scenario} needs a graph")
    before = fga.compute_fga(g, cfg)
    cert = None
    if scenario == INDIRECT_SYBIL:
        if k is None:
            raise ValueError("the indirect sybil scenario needs k")
        cert = check_min_k_neighbour(g, k)
        if not cert.holds:
            raise ValueError(f"the graph is not a minimum-{k}-neighbour network")

    reports = []
    for trial in range(trials):
        rng = utils.rng_for(seed, trial)
        if scenario == DIRECT_SYBIL:
            reports.append(_direct_sybil_trial(g, before, cfg, rng, trial))
        elif scenario == INDIRECT_SYBIL:
            reports.append(_indirect_sybil_trial(g, before, cfg, rng, trial, k, cert))
        else:
            reports.append(_flip_trial(g, before, cfg, rng, trial))
    return _summarize(scenario, reports)


def stabiliser_grid(ks=STABILISER_KS, ls=STABILISER_LS, deltas=STABILISER_DELTAS, cfg=None) -> typing.List[BoundReport]:
    reports = []
    for k in ks:
        for l in ls:
            for delta in deltas:
                reports.append(stabiliser_report(k, l, delta, cfg=cfg, trial=len(reports)))
    return _summarize(STABILISER, reports)


def _summarize(scenario, reports):
    bad = sum(1 for r in reports if not r.holds)
    if bad > 0:
        utils.warn(f"{scenario}: {bad} of {len(reports)} trials broke their bound")
    else:
        utils.info(f"{scenario}: all {len(reports)} trials within their bound")
    return reports

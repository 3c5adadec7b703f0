import dataclasses
import typing

import numpy as np

import configs
import src.fga as fga
import src.gadgets as gadgets
import src.generators as generators
import src.utils as utils


FIXED_POINT = "fixed-point"
PINNED = "pinned"
MIXED = "mixed"

AXIOM_NAMES = {
    1: "smooth goodness",
    2: "increase weight",
    3: "monotonicity for goodness",
    4: "maximal trust",
    5: "groups for goodness",
    6: "baseline goodness",
    7: "smooth fairness",
    8: "monotonicity for fairness",
    9: "obvious fairness metric",
    10: "groups for fairness",
    11: "baseline fairness",
}


@dataclasses.dataclass(frozen=True)
class AxiomVerdict:
    axiom: int
    passed: bool
    samples: int
    failures: int
    max_error: float
    mode: str

    @property
    def name(self) -> str:
        return AXIOM_NAMES[self.axiom]

    def merge(self, other: 'AxiomVerdict') -> 'AxiomVerdict':
        if other.axiom != self.axiom:
            raise ValueError(f"can't merge verdicts of axioms {self.axiom} and {other.axiom}")
        mode = self.mode if self.mode == other.mode else MIXED
        return AxiomVerdict(self.axiom,
                            self.passed and other.passed,
                            self.samples + other.samples,
                            self.failures + other.failures,
                            max(self.max_error, other.max_error),
                            mode)

    def to_json(self):
        return {"axiom": self.axiom, "name": self.name, "passed": self.passed, "samples": self.samples,
                "failures": self.failures, "max_error": self.max_error, "mode": self.mode}


class _Tally:

    def __init__(self, axiom, tol=configs.AXIOM_TOLERANCE):
        self.axiom = axiom
        self.tol = tol
        self.samples = 0
        self.failures = 0
        self.max_error = 0.0
        self.modes = set()

    def record(self, error, modes=(FIXED_POINT,)):
        """error: how far the sample is from satisfying the axiom (0 or negative when it holds)."""
        self.samples += 1
        self.modes.update(modes)
        error = max(0.0, float(error))
        self.max_error = max(self.max_error, error)
        if not error <= self.tol:
            self.failures += 1
            utils.debug(f"axiom {self.axiom} failed a sample by {error:.3g}")

    def verdict(self) -> AxiomVerdict:
        if len(self.modes) == 0:
            mode = FIXED_POINT
        elif len(self.modes) == 1:
            mode = next(iter(self.modes))
        else:
            mode = MIXED
        return AxiomVerdict(self.axiom, self.failures == 0, self.samples, self.failures, self.max_error, mode)


def _cfg():
    return fga.FgaConfig.verification()


def measure_goodness(groups: typing.Sequence[gadgets.RaterGroup]) -> typing.Tuple[float, float, str]:
    """(goodness of the target, deviation from the closed form, evaluation mode)."""
    try:
        gadget = gadgets.fit_goodness_gadget(groups)
    except gadgets.GadgetError:
        return gadgets.pinned_goodness(groups), 0.0, PINNED

    scores = fga.compute_fga(gadget.graph, _cfg())
    g_v = scores.g(gadget.target)
    deviation = abs(g_v - gadget.expected_goodness)
    for r, f_r in zip(gadget.raters, gadget.rater_fairness):
        deviation = max(deviation, abs(scores.f(r) - f_r))
    return g_v, deviation, FIXED_POINT


def measure_fairness(groups: typing.Sequence[typing.Tuple[int, float]]) -> typing.Tuple[float, float, str]:
    """(fairness of the rater, deviation from the requested errors and closed form, evaluation mode)."""
    try:
        gadget = gadgets.fit_fairness_gadget(groups)
    except gadgets.GadgetError:
        return gadgets.pinned_fairness(groups), 0.0, PINNED

    scores = fga.compute_fga(gadget.graph, _cfg())
    f_r = scores.f(gadget.rater)
    deviation = abs(f_r - gadget.expected_fairness)
    for u, d in zip(gadget.rated_set, gadget.errors):
        realized = abs(gadget.graph.weight(gadget.rater, u) - scores.g(u))
        deviation = max(deviation, abs(realized - d))
    return f_r, deviation, FIXED_POINT


def _single(f, omega, raters=configs.GADGET_RATERS):
    return [gadgets.RaterGroup(raters, omega, f)]


def check_smooth_goodness(f0, delta, omega0) -> AxiomVerdict:
    if not (utils.in_range(f0, 0, 1) and utils.in_range(f0 + delta, 0, 1) and utils.in_range(delta, 0, 1)):
        raise ValueError(f"f0={f0} and f0+delta={f0 + delta} must both lie in [0, 1]")
    utils.check_weight(omega0, what="omega0")
    tally = _Tally(1)
    g_sum, dev1, m1 = measure_goodness(_single(f0 + delta, omega0))
    g_a, dev2, m2 = measure_goodness(_single(f0, omega0))
    g_b, dev3, m3 = measure_goodness(_single(delta, omega0))
    tally.record(max(abs(g_sum - (g_a + g_b)), dev1, dev2, dev3), (m1, m2, m3))
    return tally.verdict()


def check_increase_weight(f0, omega0, delta) -> AxiomVerdict:
    utils.check_weight(omega0, what="omega0")
    utils.check_weight(delta, what="delta")
    utils.check_weight(omega0 + delta, what="omega0 + delta")
    if not utils.in_range(f0, 0, 1):
        raise ValueError(f"f0 out of range: {f0}")
    tally = _Tally(2)
    g_sum, dev1, m1 = measure_goodness(_single(f0, omega0 + delta))
    g_a, dev2, m2 = measure_goodness(_single(f0, omega0))
    g_b, dev3, m3 = measure_goodness(_single(f0, delta))
    tally.record(max(abs(g_sum - (g_a + g_b)), dev1, dev2, dev3), (m1, m2, m3))
    return tally.verdict()


def _monotone_pair(tally, f1, w1, f2, w2, by_magnitude=False):
    g1, dev1, m1 = measure_goodness(_single(f1, w1))
    g2, dev2, m2 = measure_goodness(_single(f2, w2))
    if by_magnitude:
        gap = abs(g2) - abs(g1)
    else:
        gap = g2 - g1
    tally.record(max(gap, dev1, dev2), (m1, m2))


def check_monotonicity_goodness(samples=100, rng=None) -> AxiomVerdict:
    """Higher ratings (at equal fairness) or fairer raters (at equal rating) never give lower goodness.

    For negative ratings, fairer raters push goodness further down, so that half is checked on |g|.
    """
    rng = rng if rng is not None else np.random.default_rng()
    tally = _Tally(3)
    for i in range(samples):
        if i % 2 == 0:
            f = rng.uniform(0, 1)
            w1, w2 = sorted(rng.uniform(-1, 1, size=2), reverse=True)
            if w1 == w2:
                continue
            _monotone_pair(tally, f, w1, f, w2)
        else:
            w = rng.uniform(-1, 1)
            f1, f2 = sorted(rng.uniform(0, 1, size=2), reverse=True)
            if f1 == f2:
                continue
            _monotone_pair(tally, f1, w, f2, w, by_magnitude=w < 0)
    return tally.verdict()


def check_maximal_trust_and_baselines(raters=5, rng=None) -> typing.Tuple[AxiomVerdict, AxiomVerdict, AxiomVerdict]:
    rng = rng if rng is not None else np.random.default_rng()
    max_trust, baseline_g, baseline_f = _Tally(4), _Tally(6), _Tally(11)

    g_v, dev, mode = measure_goodness([gadgets.RaterGroup(raters, 1.0, 1.0)])
    max_trust.record(max(abs(1.0 - g_v), dev), (mode,))

    g = generators.generate_random(int(rng.integers(2, 16)), int(rng.integers(0, 30)), seed=int(rng.integers(2 ** 31)))
    g.add_node()  # isolated
    scores = fga.compute_fga(g, _cfg())
    for u in g.nodes():
        if g.indeg(u) == 0:
            baseline_g.record(abs(1.0 - scores.g(u)))
        if g.outdeg(u) == 0:
            baseline_f.record(abs(1.0 - scores.f(u)))

    return max_trust.verdict(), baseline_g.verdict(), baseline_f.verdict()


def check_groups_goodness(partition_spec: typing.Sequence[typing.Tuple[int, float, float]]) -> AxiomVerdict:
    """partition_spec: (size, fairness, rating) per homogeneous, unanimous group."""
    groups = [gadgets.RaterGroup(int(size), float(w), float(f)) for size, f, w in partition_spec if size > 0]
    if len(groups) == 0:
        raise ValueError("partition must contain at least one non-empty group")
    tally = _Tally(5)
    g_all, dev, mode = measure_goodness(groups)
    modes = [mode]
    weighted = 0.0
    for grp in groups:
        g_i, dev_i, mode_i = measure_goodness([grp])
        weighted += grp.size * g_i
        dev = max(dev, dev_i)
        modes.append(mode_i)
    expected = weighted / sum(grp.size for grp in groups)
    tally.record(max(abs(g_all - expected), dev), modes)
    return tally.verdict()


def check_smooth_fairness(d, big_d) -> AxiomVerdict:
    tally = _Tally(7)
    f_mid, dev1, m1 = measure_fairness([(configs.GADGET_RATERS, (d + big_d) / 2)])
    f_d, dev2, m2 = measure_fairness([(configs.GADGET_RATERS, d)])
    f_big, dev3, m3 = measure_fairness([(configs.GADGET_RATERS, big_d)])
    tally.record(max(abs(f_mid - (f_d + f_big) / 2), dev1, dev2, dev3), (m1, m2, m3))
    return tally.verdict()


def check_groups_fairness(groups: typing.Sequence[typing.Tuple[int, float]]) -> AxiomVerdict:
    groups = [(int(s), float(d)) for s, d in groups if s > 0]
    if len(groups) == 0:
        raise ValueError("partition must contain at least one non-empty group")
    tally = _Tally(10)
    f_all, dev, mode = measure_fairness(groups)
    modes = [mode]
    weighted = 0.0
    for size, d in groups:
        f_i, dev_i, mode_i = measure_fairness([(size, d)])
        weighted += size * f_i
        dev = max(dev, dev_i)
        modes.append(mode_i)
    expected = weighted / sum(s for s, _ in groups)
    tally.record(max(abs(f_all - expected), dev), modes)
    return tally.verdict()


def check_fairness_axioms(samples=100, rng=None) -> typing.Tuple[AxiomVerdict, ...]:
    """Verdicts for smooth fairness, monotonicity for fairness, the obvious metric and groups for fairness."""
    rng = rng if rng is not None else np.random.default_rng()
    smooth = _Tally(7).verdict()
    monotone = _Tally(8)
    obvious = _Tally(9)
    groups = _Tally(10).verdict()

    for _ in range(samples):
        d, big_d = rng.uniform(0, 2, size=2)
        smooth = _merge_sample(smooth, check_smooth_fairness(d, big_d))

        d1, d2 = sorted(rng.uniform(0, 2, size=2), reverse=True)
        if d1 > d2:
            f1, dev1, m1 = measure_fairness([(configs.GADGET_RATERS, d1)])
            f2, dev2, m2 = measure_fairness([(configs.GADGET_RATERS, d2)])
            monotone.record(max(f1 - f2, dev1, dev2), (m1, m2))

        size = int(rng.integers(1, 6))
        f0, dev0, m0 = measure_fairness([(size, 0.0)])
        f2, dev2, m2 = measure_fairness([(size, 2.0)])
        obvious.record(max(abs(1.0 - f0), abs(f2), dev0, dev2), (m0, m2))

        spec = [(int(rng.integers(1, 5)), rng.uniform(0, 2)) for _ in range(int(rng.integers(1, 4)))]
        groups = _merge_sample(groups, check_groups_fairness(spec))

    return smooth, monotone.verdict(), obvious.verdict(), groups


def _merge_sample(acc: AxiomVerdict, sample: AxiomVerdict) -> AxiomVerdict:
    if acc.samples == 0:
        return sample
    return acc.merge(sample)


def run_axiom_suite(samples=1000, seed=None) -> typing.List[AxiomVerdict]:
    rng = np.random.default_rng(seed)
    verdicts: typing.Dict[int, AxiomVerdict] = {}

    def add(v: AxiomVerdict):
        verdicts[v.axiom] = _merge_sample(verdicts[v.axiom], v) if v.axiom in verdicts else v

    utils.info(f"checking axioms over {samples} draws each")
    for _ in range(samples):
        f0 = rng.uniform(0, 1)
        add(check_smooth_goodness(f0, rng.uniform(0, 1 - f0), rng.uniform(-1, 1)))

        omega0 = rng.uniform(-1, 1)
        delta = rng.uniform(max(-1.0, -1 - omega0), min(1.0, 1 - omega0))
        add(check_increase_weight(rng.uniform(0, 1), omega0, delta))

        spec = [(int(rng.integers(1, 5)), rng.uniform(0, 1), rng.uniform(-1, 1))
                for _ in range(int(rng.integers(1, 4)))]
        add(check_groups_goodness(spec))

        for v in check_maximal_trust_and_baselines(raters=int(rng.integers(1, 8)), rng=rng):
            add(v)

    add(check_monotonicity_goodness(samples, rng))
    for v in check_fairness_axioms(samples, rng):
        add(v)

    res = [verdicts[i] for i in sorted(verdicts)]
    failed = [v.axiom for v in res if not v.passed]
    if failed:
        utils.warn(f"axioms failed: {failed}")
    return res

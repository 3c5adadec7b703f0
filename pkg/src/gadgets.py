"""Small graphs whose FGA fixed point is known in closed form.

A rater's fairness is pinned by giving it private auxiliary sinks. Each sink is rated +1 by
`anchors` nodes that rate nothing else, and by the rater with a weight chosen so the rater's
error on that sink is exactly the amount needed. With c anchors and a rater of fairness f
rating the sink with w, the sink settles at goodness (c + 2fw) / (c + 2).
"""
import dataclasses
import typing

import numpy as np

import configs
import src.fga as fga
import src.utils as utils
import src.wsn as wsn


class GadgetError(ValueError):
    """The requested fairness or rating error can't occur at an FGA fixed point with this construction."""


@dataclasses.dataclass(frozen=True)
class RaterGroup:
    size: int
    rating: float
    fairness: typing.Optional[float] = None  # None: the raters rate only the target and stay unpinned


@dataclasses.dataclass
class GoodnessGadget:
    graph: wsn.Wsn
    target: int
    raters: typing.List[int]
    rater_fairness: typing.List[float]  # expected fixed point, one per rater
    ratings: typing.List[float]
    expected_goodness: float


@dataclasses.dataclass
class FairnessGadget:
    graph: wsn.Wsn
    rater: int
    rated_set: typing.List[int]
    errors: typing.List[float]
    expected_fairness: float


def sink_goodness(f, w, anchors=configs.GADGET_ANCHORS) -> float:
    return (anchors + 2 * f * w) / (anchors + 2)


def max_error(f, anchors=configs.GADGET_ANCHORS) -> float:
    """Largest error a rater of fairness f can have on an anchored sink."""
    return (2 * anchors + 2 - 2 * f) / (anchors + 2)


def aux_weight(f, error, anchors=configs.GADGET_ANCHORS) -> float:
    """Weight a rater of fairness f must give an anchored sink to be off by exactly `error`."""
    if error < 0 or error > max_error(f, anchors) + 1e-15:
        raise GadgetError(f"error {error} is unrealizable for a rater of fairness {f} "
                          f"with {anchors} anchors (max is {max_error(f, anchors)})")
    w = (anchors - error * (anchors + 2)) / (anchors + 2 - 2 * f)
    return utils.bound(w, -1.0, 1.0)


def closed_form_goodness(groups: typing.Sequence[RaterGroup]) -> float:
    """Goodness of a node rated only by the given groups, at the fixed point."""
    total = sum(grp.size for grp in groups)
    if total == 0:
        return 1.0
    pinned = sum(grp.size * grp.fairness * grp.rating for grp in groups if grp.fairness is not None)
    free = [grp for grp in groups if grp.fairness is None and grp.size > 0]

    g = (pinned + sum(grp.size * grp.rating for grp in free)) / total
    if not free:
        return g

    # contraction with factor <= 1/2
    for _ in range(200):
        g_next = (pinned + sum(grp.size * (1 - abs(grp.rating - g) / 2) * grp.rating for grp in free)) / total
        if g_next == g:
            break
        g = g_next
    return g


@dataclasses.dataclass(frozen=True)
class _RaterPlan:
    fairness: float
    rating: float
    aux_error: typing.Optional[float]  # None when the rater needs no aux sinks


def _plan_goodness(groups, aux_sinks, anchors) -> typing.Tuple[float, typing.List[_RaterPlan]]:
    if len(groups) == 0:
        raise GadgetError("need at least one rater group")
    for grp in groups:
        if grp.size < 0:
            raise GadgetError(f"negative group size: {grp.size}")
        utils.check_weight(grp.rating, what="rating")
        if grp.fairness is not None and not utils.in_range(grp.fairness, 0.0, 1.0):
            raise GadgetError(f"fairness out of range: {grp.fairness}")

    g_v = closed_form_goodness(groups)
    plans = []
    for grp in groups:
        e_v = abs(grp.rating - g_v)
        if grp.fairness is None:
            plan = _RaterPlan(1 - e_v / 2, grp.rating, None)
        elif grp.fairness == 1 and e_v == 0:
            plan = _RaterPlan(1.0, grp.rating, None)
        else:
            d_a = (2 * (1 + aux_sinks) * (1 - grp.fairness) - e_v) / aux_sinks
            if d_a < -1e-15:
                raise GadgetError(f"fairness {grp.fairness} is too high for a rater that is off by {e_v} on the target")
            if d_a > max_error(grp.fairness, anchors):
                raise GadgetError(f"fairness {grp.fairness} needs aux error {d_a}, more than "
                                  f"{max_error(grp.fairness, anchors)} can be realized")
            plan = _RaterPlan(grp.fairness, grp.rating, max(d_a, 0.0))
        plans.extend([plan] * grp.size)
    return g_v, plans


def is_realizable(groups, aux_sinks=configs.GADGET_AUX_SINKS, anchors=configs.GADGET_ANCHORS) -> bool:
    try:
        _plan_goodness(groups, aux_sinks, anchors)
        return True
    except GadgetError:
        return False


def _add_anchored_sink(g: wsn.Wsn, rater, weight, anchors) -> int:
    sink = g.add_node()
    for _ in range(anchors):
        a = g.add_node()
        g.add_edge(a, sink, 1.0)
    g.add_edge(rater, sink, weight)
    return sink


def build_goodness_gadget(groups: typing.Sequence[RaterGroup],
                          aux_sinks=configs.GADGET_AUX_SINKS,
                          anchors=configs.GADGET_ANCHORS,
                          name="goodness-gadget") -> GoodnessGadget:
    g_v, plans = _plan_goodness(groups, aux_sinks, anchors)

    g = wsn.Wsn(name)
    target = g.add_node("target")
    raters = []
    for plan in plans:
        r = g.add_node()
        g.add_edge(r, target, plan.rating)
        if plan.aux_error is not None:
            w = aux_weight(plan.fairness, plan.aux_error, anchors)
            for _ in range(aux_sinks):
                _add_anchored_sink(g, r, w, anchors)
        raters.append(r)

    return GoodnessGadget(g, target, raters,
                          [p.fairness for p in plans],
                          [p.rating for p in plans],
                          g_v)


def goodness_gadget(f0, omega0, raters=configs.GADGET_RATERS, **kwargs) -> GoodnessGadget:
    """Target rated omega0 by `raters` nodes that all settle at fairness f0."""
    return build_goodness_gadget([RaterGroup(raters, omega0, f0)], **kwargs)


def build_fairness_gadget(groups: typing.Sequence[typing.Tuple[int, float]],
                          anchors=configs.GADGET_ANCHORS,
                          name="fairness-gadget") -> FairnessGadget:
    """One rater whose ratings have the given errors, as (count, error) groups."""
    total = sum(size for size, _ in groups)
    if total == 0:
        raise GadgetError("the rater needs at least one rated node")
    for size, d in groups:
        if size < 0 or not utils.in_range(d, 0.0, 2.0):
            raise GadgetError(f"invalid error group: ({size}, {d})")

    f_r = 1 - sum(size * d for size, d in groups) / (2 * total)

    weights = [aux_weight(f_r, d, anchors) for _, d in groups]

    g = wsn.Wsn(name)
    rater = g.add_node("rater")
    rated, errors = [], []
    for (size, d), w in zip(groups, weights):
        for _ in range(size):
            rated.append(_add_anchored_sink(g, rater, w, anchors))
            errors.append(d)
    return FairnessGadget(g, rater, rated, errors, f_r)


def fairness_gadget(d, size=configs.GADGET_RATERS, **kwargs) -> FairnessGadget:
    return build_fairness_gadget([(size, d)], **kwargs)


def gadget_sizes(aux_sinks=configs.GADGET_AUX_SINKS, anchors=configs.GADGET_ANCHORS) -> typing.Iterator[typing.Tuple[int, int]]:
    """(aux_sinks, anchors) pairs to try, doubling both until the configured maximum."""
    while aux_sinks <= configs.GADGET_MAX_AUX_SINKS and anchors <= configs.GADGET_MAX_ANCHORS:
        yield aux_sinks, anchors
        aux_sinks, anchors = 2 * aux_sinks, 2 * anchors


def fit_goodness_gadget(groups: typing.Sequence[RaterGroup], name="goodness-gadget") -> GoodnessGadget:
    """The smallest goodness gadget in gadget_sizes() that realizes the groups."""
    err = None
    for aux_sinks, anchors in gadget_sizes():
        try:
            _plan_goodness(groups, aux_sinks, anchors)
        except GadgetError as e:
            err = e
            continue
        if aux_sinks != configs.GADGET_AUX_SINKS:
            utils.debug(f"{name}: grew to {aux_sinks} aux sinks with {anchors} anchors each")
        return build_goodness_gadget(groups, aux_sinks=aux_sinks, anchors=anchors, name=name)
    raise err


def fit_fairness_gadget(groups: typing.Sequence[typing.Tuple[int, float]], name="fairness-gadget") -> FairnessGadget:
    err = None
    for _, anchors in gadget_sizes():
        try:
            return build_fairness_gadget(groups, anchors=anchors, name=name)
        except GadgetError as e:
            err = e
    raise err


def pinned_goodness(groups: typing.Sequence[RaterGroup]) -> float:
    """Goodness of a node from one goodness pass with the raters' fairness held at the given values."""
    f = []
    edges = []
    for grp in groups:
        fairness = 1.0 if grp.fairness is None else grp.fairness
        for _ in range(grp.size):
            edges.append((len(f) + 1, 0, grp.rating))
            f.append(fairness)
    arrays = wsn.EdgeArrays.from_edges(len(f) + 1, edges)
    return float(fga.goodness_pass(arrays, np.array([1.0] + f))[0])


def pinned_fairness(groups: typing.Sequence[typing.Tuple[int, float]]) -> float:
    """Fairness of a rater from one fairness pass, with every rated node's goodness held at 1."""
    edges = []
    for size, d in groups:
        if not utils.in_range(d, 0.0, 2.0):
            raise GadgetError(f"error out of range: {d}")
        for _ in range(size):
            edges.append((0, len(edges) + 1, 1.0 - d))
    arrays = wsn.EdgeArrays.from_edges(len(edges) + 1, edges)
    goodness = np.ones(arrays.n)
    return float(fga.fairness_pass(arrays, goodness)[0])

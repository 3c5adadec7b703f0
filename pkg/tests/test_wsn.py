import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import src.utils as utils
import src.wsn as wsn

from .strategies import edge_lists, weights, wsns


def _triangle():
    return wsn.from_edges(3, [(0, 1, 0.5), (1, 2, -0.25), (2, 0, 1.0)])


def test_add_edge():
    g = wsn.from_edges(2, [])
    g.add_edge(0, 1, 0.5)
    assert g.has_edge(0, 1)
    assert not g.has_edge(1, 0)
    assert g.weight(0, 1) == 0.5
    assert g.outdeg(0) == 1 and g.indeg(1) == 1
    assert g.indeg(0) == 0 and g.outdeg(1) == 0


def test_add_edge_rejects_bad_input():
    g = wsn.from_edges(2, [(0, 1, 0.5)])
    with pytest.raises(ValueError):
        g.add_edge(1, 0, 1.5)
    with pytest.raises(ValueError):
        g.add_edge(0, 0, 0.1)
    with pytest.raises(ValueError):
        g.add_edge(0, 1, 0.2)
    with pytest.raises(KeyError):
        g.add_edge(0, 5, 0.2)
    assert g.num_edges() == 1


def test_update_weight():
    g = wsn.from_edges(2, [(0, 1, 0.5)])
    g.update_weight(0, 1, -0.5)
    assert g.weight(0, 1) == -0.5
    with pytest.raises(KeyError):
        g.update_weight(1, 0, 0.5)


def test_update_weight_is_idempotent():
    g = wsn.from_edges(2, [(0, 1, 0.5)])
    g.update_weight(0, 1, 0.5)
    assert list(g.edges()) == [(0, 1, 0.5)]


def test_rate_reports_move_kind():
    g = wsn.from_edges(3, [(0, 1, 0.5)])
    assert g.rate(0, 1, -1.0) == wsn.WEIGHT_UPDATE
    assert g.rate(2, 1, -1.0) == wsn.EDGE_ADDITION
    assert g.num_edges() == 2


def test_neighbourhood():
    g = wsn.from_edges(4, [(0, 1, 1.0), (1, 0, -1.0)])
    isolated = g.neighbourhood(3)
    assert isolated.pred == frozenset() and isolated.succ == frozenset()
    assert isolated.indeg == isolated.outdeg == 0

    assert g.neighbourhood(0).pred == {1}
    assert g.neighbourhood(0).succ == {1}

    tri = _triangle().neighbourhood(1)
    assert tri.pred == {0} and tri.succ == {2}


def test_labels():
    g = wsn.Wsn("labels")
    a = g.add_node("alice")
    b = g.node_for_label("bob", create=True)
    assert (a, b) == (0, 1)
    assert g.label_of(1) == "bob"
    assert g.node_for_label("alice") == 0
    assert g.add_node() == 2 and g.label_of(2) == "2"
    with pytest.raises(ValueError):
        g.add_node("alice")
    with pytest.raises(KeyError):
        g.node_for_label("carol")


def test_copy_is_independent():
    g = _triangle()
    h = g.copy()
    h.add_edge(0, 2, -1.0)
    h.add_node("extra")
    assert not g.has_edge(0, 2)
    assert g.num_nodes() == 3
    assert h.edge_arrays() is not g.edge_arrays()


def test_normalize_rating():
    scale = wsn.RatingScale(10)
    assert wsn.normalize_rating(10, scale) == 1.0
    assert wsn.normalize_rating(-10, scale) == -1.0
    assert wsn.normalize_rating(3, scale) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        wsn.normalize_rating(11, scale)
    with pytest.raises(ValueError):
        wsn.RatingScale(0)


@given(raw=st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_normalize_rating_is_odd(raw):
    scale = wsn.RatingScale(10)
    assert wsn.normalize_rating(-raw, scale) == -wsn.normalize_rating(raw, scale)


@settings(deadline=None)
@given(g=wsns())
def test_degree_sums(g):
    assert g.validate()
    assert sum(g.indeg(v) for v in g.nodes()) == g.num_edges()
    assert sum(g.outdeg(v) for v in g.nodes()) == g.num_edges()
    arrays = g.edge_arrays()
    assert arrays.indeg.sum() == arrays.outdeg.sum() == len(arrays)


@settings(deadline=None)
@given(g=wsns(), data=st.data())
def test_add_then_remove_edge_restores_graph(g, data):
    missing = [(u, v) for u in g.nodes() for v in g.nodes() if u != v and not g.has_edge(u, v)]
    if not missing:
        return
    u, v = data.draw(st.sampled_from(missing))
    before = list(g.edges())
    g.add_edge(u, v, data.draw(weights))
    g._remove_edge(u, v)
    assert list(g.edges()) == before


@settings(deadline=None)
@given(start=edge_lists(), data=st.data())
def test_incremental_arrays_match_rebuilt(start, data):
    n, edges = start
    g = wsn.from_edges(n, edges)
    g.edge_arrays()
    if n > 1:
        moves = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), weights)
                                   .filter(lambda m: m[0] != m[1]), max_size=10))
        for u, v, w in moves:
            g.rate(u, v, w)
    g.add_node()
    incremental = g.edge_arrays()
    rebuilt = wsn.EdgeArrays.from_edges(g.num_nodes(), g.edges())
    assert incremental.n == rebuilt.n
    np.testing.assert_array_equal(incremental.src, rebuilt.src)
    np.testing.assert_array_equal(incremental.dst, rebuilt.dst)
    np.testing.assert_array_equal(incremental.w, rebuilt.w)


def test_validate_catches_corruption():
    g = _triangle()
    g._g.add_edge(1, 1, weight=0.5)
    with pytest.raises(utils.InvariantViolation):
        g.validate()

import numpy as np
import pytest
from hypothesis import given, settings

import src.fga as fga
import src.generators as generators
import src.wsn as wsn

from .oracle import long_run_fga
from .strategies import wsns


VERIFY = fga.FgaConfig.verification()


def test_isolated_node():
    scores = fga.compute_fga(wsn.from_edges(1, []))
    assert scores.f(0) == 1.0 and scores.g(0) == 1.0
    assert scores.converged()


def test_empty_graph():
    scores = fga.compute_fga(wsn.Wsn())
    assert len(scores) == 0


@pytest.mark.parametrize("w", [1.0, 0.5, 0.0, -0.5, -1.0])
def test_single_edge(w):
    scores = fga.compute_fga(wsn.from_edges(2, [(0, 1, w)]), VERIFY)
    assert scores.f(0) == pytest.approx(1.0, abs=1e-9)
    assert scores.g(1) == pytest.approx(w, abs=1e-9)
    assert scores.f(1) == 1.0 and scores.g(0) == 1.0


def test_opposing_raters_cancel():
    scores = fga.compute_fga(wsn.from_edges(3, [(1, 0, 1.0), (2, 0, -1.0)]), VERIFY)
    assert scores.g(0) == pytest.approx(0.0, abs=1e-9)
    assert scores.f(1) == pytest.approx(0.5, abs=1e-9)
    assert scores.f(2) == pytest.approx(0.5, abs=1e-9)


def test_two_cycle():
    scores = fga.compute_fga(wsn.from_edges(2, [(0, 1, 1.0), (1, 0, -1.0)]), VERIFY)
    # g0 = -f1, g1 = f0, f0 = 1 - (1 - g1) / 2, f1 = 1 - |-1 - g0| / 2  =>  f0 = 1, f1 = 1 - (1 - f1) / 2
    assert scores.f(0) == pytest.approx(1.0, abs=1e-9)
    assert scores.g(1) == pytest.approx(1.0, abs=1e-9)
    assert scores.f(1) == pytest.approx(1.0, abs=1e-9)
    assert scores.g(0) == pytest.approx(-1.0, abs=1e-9)


def test_matches_plain_python_iteration():
    g = generators.generate_random(8, 20, seed=3)
    scores = fga.compute_fga(g, VERIFY)
    f, gd = long_run_fga(g)
    for v in g.nodes():
        assert scores.f(v) == pytest.approx(f[v], abs=1e-9)
        assert scores.g(v) == pytest.approx(gd[v], abs=1e-9)


@settings(deadline=None, max_examples=50)
@given(g=wsns(max_nodes=10, max_edges=30))
def test_fixed_point_equations(g):
    scores = fga.compute_fga(g, VERIFY)
    f, gd = long_run_fga(g)
    np.testing.assert_allclose(scores.fairness, [f[v] for v in g.nodes()], atol=1e-9)
    np.testing.assert_allclose(scores.goodness, [gd[v] for v in g.nodes()], atol=1e-9)


@settings(deadline=None, max_examples=50)
@given(g=wsns(max_nodes=10, max_edges=30))
def test_sweeps_stay_in_range(g):
    arrays = g.edge_arrays()
    for t, (f, gd) in enumerate(fga.sweeps(arrays)):
        assert np.all((f >= 0) & (f <= 1))
        assert np.all((gd >= -1) & (gd <= 1))
        if t >= 30:
            break


@pytest.mark.parametrize("seed", range(50))
def test_convergence_bound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 201))
    g = generators.generate_random(n, int(rng.integers(0, 4 * n + 1)), seed=seed)
    arrays = g.edge_arrays()
    history = []
    for t, (f, gd) in enumerate(fga.sweeps(arrays), start=1):
        history.append((f, gd))
        if t >= 200:
            break
    f_ref, g_ref = history[-1]
    for t in range(1, 41):
        f, gd = history[t - 1]
        assert np.max(np.abs(f_ref - f), initial=0.0) <= 0.5 ** t + 1e-13
        assert np.max(np.abs(g_ref - gd), initial=0.0) <= 0.5 ** (t - 1) + 1e-13


def test_deterministic_under_insertion_order():
    g = generators.generate_random(40, 160, seed=11)
    edges = list(g.edges())
    shuffled = [edges[i] for i in np.random.default_rng(0).permutation(len(edges))]
    a = fga.compute_fga(g)
    b = fga.compute_fga(wsn.from_edges(g.num_nodes(), shuffled))
    np.testing.assert_array_equal(a.fairness, b.fairness)
    np.testing.assert_array_equal(a.goodness, b.goodness)
    assert a.iterations_run == b.iterations_run


def test_warm_start_without_edits_stops_at_once():
    g = generators.generate_random(50, 200, seed=2)
    scores = fga.compute_fga(g)
    again = fga.recompute_after(g, scores)
    assert again.iterations_run == 1
    np.testing.assert_allclose(again.fairness, scores.fairness, atol=1e-8)


def test_warm_start_after_weight_update():
    g = generators.generate_random(50, 200, seed=5)
    before = fga.compute_fga(g, VERIFY)
    u, v, w = next(iter(g.edges()))
    g.update_weight(u, v, -w if w != 0 else 1.0)
    warm = fga.recompute_after(g, before, VERIFY)
    cold = fga.compute_fga(g, VERIFY)
    np.testing.assert_allclose(warm.fairness, cold.fairness, atol=1e-9)
    np.testing.assert_allclose(warm.goodness, cold.goodness, atol=1e-9)


def test_warm_start_with_new_node():
    g = generators.generate_random(30, 120, seed=6)
    before = fga.compute_fga(g, VERIFY)
    s = g.add_node("sybil")
    g.add_edge(s, 0, -1.0)
    warm = fga.recompute_after(g, before, VERIFY)
    cold = fga.compute_fga(g, VERIFY)
    assert len(warm) == 31
    np.testing.assert_allclose(warm.goodness, cold.goodness, atol=1e-9)


def test_warm_scores_for_a_larger_graph_are_rejected():
    big = fga.compute_fga(generators.generate_random(5, 10, seed=0))
    with pytest.raises(ValueError):
        fga.recompute_after(wsn.from_edges(3, []), big)


def test_predict_weight():
    g = wsn.from_edges(2, [(0, 1, 1.0)])
    scores = fga.compute_fga(g, VERIFY)
    assert fga.predict_weight(scores, 0, 1) == pytest.approx(1.0)
    assert fga.predict_weight(scores, 1, 0) == pytest.approx(1.0)
    unfair = fga.FgaScores(np.array([0.0, 1.0]), np.array([1.0, 0.4]))
    assert fga.predict_weight(unfair, 1, 1) == pytest.approx(0.4)
    assert fga.predict_weight(unfair, 0, 1) == 0.0
    with pytest.raises(KeyError):
        fga.predict_weight(scores, 0, 7)


def test_scores_are_read_only():
    scores = fga.compute_fga(wsn.from_edges(2, [(0, 1, 0.5)]))
    with pytest.raises(ValueError):
        scores.fairness[0] = 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        fga.FgaConfig(max_iterations=0)
    with pytest.raises(ValueError):
        fga.FgaConfig(residual_tolerance=0.0)


def test_iteration_cap():
    g = generators.generate_random(30, 120, seed=1)
    scores = fga.compute_fga(g, fga.FgaConfig(max_iterations=2, residual_tolerance=1e-15))
    assert scores.iterations_run == 2
    assert not scores.converged()


def test_score_csv(tmp_path):
    g = generators.attack_demo("b")
    scores = fga.compute_fga(g)
    path = tmp_path / "scores.csv"
    fga.write_scores_csv(scores, g, path)
    labels, read = fga.read_scores_csv(path)
    assert labels == g.labels()
    np.testing.assert_allclose(read.fairness, scores.fairness, atol=1e-11)
    np.testing.assert_allclose(read.goodness, scores.goodness, atol=1e-11)

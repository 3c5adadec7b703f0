import pytest

import configs
import src.fga as fga
import src.generators as generators
import src.loader as loader
import src.userdata as userdata
import src.utils as utils
import src.wsn as wsn


TEN = wsn.RatingScale(10)


def _write(tmp_path, text, name="ratings.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_normalizes_ratings(tmp_path):
    g = loader.load_rating_csv(_write(tmp_path, "a,b,3\nb,c,-10\n"), TEN)
    assert g.labels() == ["a", "b", "c"]
    assert list(g.edges()) == [(0, 1, pytest.approx(0.3)), (1, 2, -1.0)]
    assert g.name == "ratings"


def test_repeated_rating_keeps_the_last(tmp_path):
    g = loader.load_rating_csv(_write(tmp_path, "a,b,5\nb,c,2\na,b,-4\n"), TEN)
    assert g.num_edges() == 2
    assert g.weight(0, 1) == pytest.approx(-0.4)


def test_repeated_rating_keeps_the_latest_by_time(tmp_path):
    g = loader.load_rating_csv(_write(tmp_path, "a,b,5,200\nb,c,2,50\na,b,-4,100\n"), TEN)
    assert g.weight(0, 1) == pytest.approx(0.5)


def test_header_is_skipped(tmp_path):
    g = loader.load_rating_csv(_write(tmp_path, "source,target,rating,time\n1,2,1,10\n2,3,-1,11\n"))
    assert g.num_edges() == 2
    assert g.labels() == ["1", "2", "3"]


def test_self_loop_reports_line(tmp_path):
    with pytest.raises(ValueError, match=r":2: self-loop"):
        loader.load_rating_csv(_write(tmp_path, "a,b,1\na,a,1\n"))


def test_malformed_row_reports_line(tmp_path):
    with pytest.raises(ValueError, match=r":3: malformed row"):
        loader.load_rating_csv(_write(tmp_path, "a,b,1\nb,c,1\nc,d,lots\n"))
    with pytest.raises(ValueError, match=r":2: malformed row"):
        loader.load_rating_csv(_write(tmp_path, "a,b,1,5\nb,c,1,yesterday\n"))
    with pytest.raises(ValueError, match=r":2: malformed row"):
        loader.load_rating_csv(_write(tmp_path, "a,b,1\nb\n"))


def test_rating_out_of_scale(tmp_path):
    with pytest.raises(ValueError, match=r":1: rating"):
        loader.load_rating_csv(_write(tmp_path, "a,b,11\n"), TEN)


def test_empty_file(tmp_path):
    g = loader.load_rating_csv(_write(tmp_path, ""))
    assert g.num_nodes() == 0
    stats = loader.compute_stats(g, fga.compute_fga(g))
    assert stats.node_count == stats.edge_count == 0
    assert stats.positive_edge_fraction == 0.0
    assert all(v == 0.0 for v in stats.fair_fraction_at.values())


def test_export_then_load(tmp_path):
    g = generators.generate_random(20, 60, seed=8)
    path = tmp_path / "export.csv"
    loader.export_rating_csv(g, path)
    back = loader.load_rating_csv(path)
    original = {(g.label_of(u), g.label_of(v)): w for u, v, w in g.edges()}
    loaded = {(back.label_of(u), back.label_of(v)): w for u, v, w in back.edges()}
    assert original.keys() == loaded.keys()
    for key, w in original.items():
        assert loaded[key] == pytest.approx(w, abs=1e-11)


def test_compute_stats():
    g = generators.attack_demo("b")
    stats = loader.compute_stats(g, fga.compute_fga(g))
    assert (stats.node_count, stats.edge_count) == (5, 4)
    assert stats.positive_edge_fraction == pytest.approx(0.75)
    assert stats.small_indegree_fraction == 1.0
    assert stats.goodness_fraction_ge[0.0] == pytest.approx(1.0)
    assert set(stats.to_json()["fair_fraction_at"]) == {"0.95", "0.7"}


def test_compute_stats_rejects_mismatched_scores():
    g = generators.attack_demo("a")
    with pytest.raises(ValueError):
        loader.compute_stats(g, fga.compute_fga(generators.attack_demo("b")))


def test_missing_dataset(tmp_path):
    loader.clear_cache()
    with pytest.raises(utils.InsufficientDataError):
        loader.load_dataset("otc", data_dir=str(tmp_path))
    with pytest.raises(ValueError):
        loader.load_dataset("myspace", data_dir=str(tmp_path))


def test_dataset_is_cached(tmp_path):
    loader.clear_cache()
    (tmp_path / configs.DATASETS["rfa"][0]).write_text("x,y,1\ny,z,-1\n")
    first = loader.load_dataset("rfa", data_dir=str(tmp_path))
    assert first.name == "rfa"
    assert loader.load_dataset("rfa", data_dir=str(tmp_path)) is first
    loader.clear_cache()


@pytest.mark.parametrize("name, nodes, edges, positive", [
    ("otc", 5881, 35592, 0.8990),
    ("alpha", 3783, 24186, 0.9364),
])
def test_dataset_statistics(name, nodes, edges, positive):
    if userdata.find_dataset(configs.DATASETS[name][0]) is None:
        pytest.skip(f"{name} dataset not available")
    g = loader.load_dataset(name)
    stats = loader.compute_stats(g, fga.compute_fga(g))
    assert (stats.node_count, stats.edge_count) == (nodes, edges)
    assert round(stats.positive_edge_fraction, 4) == positive


@pytest.mark.parametrize("name", sorted(configs.DATASETS))
def test_dataset_raters_are_all_fair(name):
    if userdata.find_dataset(configs.DATASETS[name][0]) is None:
        pytest.skip(f"{name} dataset not available")
    g = loader.load_dataset(name)
    stats = loader.compute_stats(g, fga.compute_fga(g))
    assert stats.fair_fraction_at[0.7] == 1.0

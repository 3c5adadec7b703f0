import json

import pytest

import main
import src.loader as loader


@pytest.fixture
def ratings(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text("alice,bob,8\ncarol,bob,6\nbob,dave,-2\nalice,dave,4\n")
    return path


def test_compute_and_predict(tmp_path, ratings, capsys):
    scores = tmp_path / "scores.csv"
    assert main.main(["--out-dir", str(tmp_path), "compute", "--input", str(ratings), "--r-max", "10",
                      "--out", str(scores)]) == 0
    assert scores.exists()
    capsys.readouterr()

    assert main.main(["predict", "--scores", str(scores), "carol", "dave"]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["source"] == "carol"
    assert -1.0 <= blob["prediction"] <= 1.0


def test_predict_unknown_label(tmp_path, ratings):
    assert main.main(["predict", "--input", str(ratings), "--r-max", "10", "alice", "zed"]) == 2


def test_stats(ratings, capsys):
    assert main.main(["stats", "--input", str(ratings), "--r-max", "10"]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["node_count"] == 4
    assert blob["edge_count"] == 4


def test_out_of_scale_input_is_a_config_error(ratings):
    assert main.main(["stats", "--input", str(ratings)]) == 2


def test_missing_dataset(tmp_path):
    loader.clear_cache()
    assert main.main(["--data-dir", str(tmp_path), "stats", "--dataset", "otc"]) == 3


def test_attack(tmp_path, capsys):
    out = tmp_path / "attack.json"
    assert main.main(["attack", "--generator", "attack-demo", "--target", "1", "--mode", "direct",
                      "--attacker-class", "sybil", "--k", "2", "--out", str(out)]) == 0
    blob = json.loads(out.read_text())
    assert blob["target_label"] == "1"
    assert len(blob["moves"]) == 2
    assert blob["delta_goodness"][str(0)] < 0


def test_attack_needs_a_graph():
    assert main.main(["attack", "--k", "1"]) == 2


def test_attack_without_enough_attackers():
    assert main.main(["attack", "--generator", "attack-demo", "--target", "1", "--k", "3"]) == 3


def test_axioms(capsys):
    assert main.main(["--format", "csv", "axioms", "--samples", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("axiom,name,passed")
    assert len(lines) == 12


def test_bounds(capsys):
    assert main.main(["bounds", "--scenario", "stabiliser", "--trials", "3"]) == 0
    capsys.readouterr()
    assert main.main(["bounds", "--scenario", "indirect-sybil", "--k", "3", "--n", "20", "--trials", "10"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 10


def test_campaign(tmp_path, capsys):
    code = main.main(["--out-dir", str(tmp_path), "--format", "csv", "campaign",
                      "--generator", "random-erdos", "--param", "n=60", "--param", "m=400",
                      "--param", "positive_fraction=0.9", "--attacker-class", "sybil",
                      "--k-values", "1", "2", "--samples", "2"])
    assert code == 0
    paths = capsys.readouterr().out.split()
    assert [p.rsplit("-", 1)[1] for p in paths] == ["records.csv", "summary.csv"]


def test_campaign_preset_needs_dataset():
    assert main.main(["campaign", "--preset", "table-2"]) == 2


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main.main(["attack", "--mode", "telepathic"])

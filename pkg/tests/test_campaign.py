import json

import numpy as np
import pandas as pd
import pytest

import configs
import src.attacks as attacks
import src.campaign as campaign
import src.generators as generators


RANDOM = generators.GeneratorSpec(generators.RANDOM_ERDOS, {"n": 60, "m": 400, "positive_fraction": 0.9})
SYBILS = attacks.SelectionCriteria(attacker_class=configs.SYBIL)


def _config(**kwargs):
    args = dict(name="test", generator=RANDOM, mode=attacks.DIRECT, k_values=(0, 1, 2),
                criteria=SYBILS, samples=3, seed=7)
    args.update(kwargs)
    return campaign.ExperimentConfig(**args)


def test_campaign_records():
    res = campaign.run_campaign(_config())
    assert list(res.records.columns) == campaign.RECORD_COLUMNS
    assert len(res.records) == 9
    assert not res.errors
    assert list(zip(res.records["cell"], res.records["sample"])) == [(c, s) for c in range(3) for s in range(3)]
    assert (res.records[res.records["k"] == 0]["delta"] == 0.0).all()
    assert (res.records[res.records["k"] == 2]["delta"] < 0).all()


def test_campaign_is_deterministic():
    a = campaign.run_campaign(_config())
    b = campaign.run_campaign(_config())
    pd.testing.assert_frame_equal(a.records, b.records)


def test_campaign_workers_give_the_same_records():
    serial = campaign.run_campaign(_config())
    parallel = campaign.run_campaign(_config(workers=2))
    pd.testing.assert_frame_equal(serial.records, parallel.records)
    pd.testing.assert_frame_equal(serial.summary, parallel.summary)


def test_summary_matches_records():
    res = campaign.run_campaign(_config(samples=4))
    for _, row in res.summary.iterrows():
        deltas = res.records[res.records["cell"] == row["cell"]]["delta"]
        assert row["n"] == 4
        assert row["mean"] == pytest.approx(deltas.mean())
        assert row["sd"] == pytest.approx(deltas.std(ddof=1))
        assert row["max"] == pytest.approx(deltas.max())
        assert row["ci_half_width"] == pytest.approx(configs.CI_Z * deltas.std(ddof=1) / np.sqrt(4))


def test_single_sample_cells_have_no_spread(tmp_path):
    res = campaign.run_campaign(_config(samples=1, k_values=(1,)))
    assert np.isnan(res.summary["sd"].iloc[0])
    campaign.report([res], tmp_path, format="csv")
    text = (tmp_path / "test-seed7-summary.csv").read_text()
    assert ",NA," in text


def test_report_is_reproducible(tmp_path):
    first = campaign.report([campaign.run_campaign(_config())], tmp_path / "a", format="csv")
    second = campaign.report([campaign.run_campaign(_config())], tmp_path / "b", format="csv")
    assert [p.rsplit("/", 1)[1] for p in first] == ["test-seed7-records.csv", "test-seed7-summary.csv"]
    for x, y in zip(first, second):
        with open(x) as fx, open(y) as fy:
            assert fx.read() == fy.read()


def test_json_report(tmp_path):
    res = campaign.run_campaign(_config(samples=2))
    [path] = campaign.report([res], tmp_path, format="json")
    with open(path) as f:
        blob = json.load(f)
    assert blob["config"]["seed"] == 7
    assert len(blob["records"]) == 6
    assert len(blob["summary"]) == 3
    with pytest.raises(ValueError):
        campaign.report([res], tmp_path, format="xml")


def test_mixed_campaign_cells():
    cfg = _config(mode=attacks.MIXED, k1_values=(0, 1), k2_values=(1, 2), samples=2)
    assert cfg.cells() == [(0, 1), (0, 2), (1, 1), (1, 2)]
    assert len(_config(mode=attacks.MIXED).cells()) == 36
    res = campaign.run_campaign(cfg)
    rec = res.records
    assert len(rec) == 8
    np.testing.assert_allclose(rec["delta_direct"] + rec["delta_indirect"], rec["delta"], atol=1e-12)
    assert (rec[rec["k1"] == 0]["delta_direct"] == 0.0).all()


def test_campaign_without_qualifying_targets():
    impossible = attacks.SelectionCriteria(target_min_goodness=1.5, attacker_class=configs.SYBIL)
    res = campaign.run_campaign(_config(criteria=impossible))
    assert len(res.records) == 0
    assert sorted(res.errors) == [0, 1, 2]
    assert len(res.summary) == 0


def test_empty_campaign(tmp_path):
    res = campaign.run_campaign(_config(samples=0))
    paths = campaign.report([res], tmp_path)
    assert pd.read_csv(paths[0]).columns.tolist() == campaign.RECORD_COLUMNS


def test_config_validation():
    with pytest.raises(ValueError):
        campaign.ExperimentConfig()
    with pytest.raises(ValueError):
        _config(mode="sneaky")
    with pytest.raises(ValueError):
        _config(k_values=(-1,))
    with pytest.raises(ValueError):
        _config(workers=0)


def test_presets():
    fig3 = campaign.figure_3("otc")
    assert len(fig3) == 4
    assert {c.mode for c in fig3} == {attacks.DIRECT, attacks.INDIRECT}
    assert all(c.samples == configs.SAMPLES_PER_K["otc"] for c in fig3)

    [fig4] = campaign.figure_4("alpha")
    assert fig4.mode == attacks.MIXED and fig4.samples == configs.MIXED_SAMPLES["alpha"]

    [table] = campaign.table_2("otc", seed=3)
    assert table.mode == attacks.INDIRECT_SCALED
    assert table.k_values == (20,)
    assert table.samples == 20
    assert table.criteria.target_indeg_below == 11
    assert table.criteria.target_min_goodness == 0.8
    assert table.criteria.attacker_class == configs.SYBIL
    with pytest.raises(ValueError):
        campaign.table_2("myspace")

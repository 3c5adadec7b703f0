"""Trend checks on the SNAP datasets. They skip when the rating files aren't in the data directory."""
import pytest

import configs
import src.attacks as attacks
import src.campaign as campaign
import src.userdata as userdata


def _needs(name):
    if userdata.find_dataset(configs.DATASETS[name][0]) is None:
        pytest.skip(f"{name} dataset not available")


def _strength(result):
    """Mean |delta| per attacker count."""
    records = result.records.assign(size=result.records["delta"].abs())
    return records.groupby("k")["size"].mean().to_dict()


@pytest.mark.slow
@pytest.mark.parametrize("name", ["otc", "alpha"])
def test_direct_attacks_dwarf_greedy_indirect_ones(name):
    _needs(name)
    k_values = (1, 4, 7)
    direct = campaign.run_campaign(campaign.ExperimentConfig(name=f"direct-{name}", dataset=name,
                                                             mode=attacks.DIRECT, k_values=k_values,
                                                             samples=10, seed=0, workers=4))
    indirect = campaign.run_campaign(campaign.ExperimentConfig(name=f"indirect-{name}", dataset=name,
                                                               mode=attacks.INDIRECT, k_values=k_values,
                                                               samples=10, seed=0, workers=4))
    assert not direct.errors and not indirect.errors
    direct_strength, indirect_strength = _strength(direct), _strength(indirect)
    assert direct_strength[7] > direct_strength[1]
    assert 0.2 <= direct_strength[7] <= 1.2
    assert all(s < 0.05 for s in indirect_strength.values()), indirect_strength


@pytest.mark.slow
@pytest.mark.parametrize("name", ["otc", "alpha"])
def test_scaled_sybil_attack_on_weak_targets(name):
    _needs(name)
    [cfg] = campaign.table_2(name, seed=0, workers=4)
    result = campaign.run_campaign(cfg)
    assert not result.errors
    sizes = result.records["delta"].abs()
    assert len(sizes) == configs.WEAK_TARGET_PARAMS[name]["samples"]
    assert sizes.max() >= 0.15
    assert sizes.median() <= 0.10

import pytest

from projrecon import (
    ConfigError,
    TrialConfig,
    config_from_dict,
    config_to_dict,
    run_critical_cardinality,
    run_sw_separability,
    run_uniqueness_trials,
    summary_to_dict,
)


def test_uniqueness_trials_all_pass():
    cfg = TrialConfig(d=3, n=4, block_dims=(2, 2), trials=20, seed=1)
    summary = run_uniqueness_trials(cfg)
    assert summary.trials_run == 20
    assert summary.uniqueness_rate == 1.0
    assert summary.failures == ()
    assert summary.support_cardinality_histogram == {4: 20}
    assert summary.residual_extrema["max"] < 1e-10


def test_uniqueness_requires_supercritical():
    with pytest.raises(ConfigError):
        run_uniqueness_trials(TrialConfig(d=3, n=3, block_dims=(1, 1), trials=2))


def test_uniqueness_rate_times_trials_is_integer():
    cfg = TrialConfig(d=3, n=3, block_dims=(2, 2), trials=7, seed=3)
    summary = run_uniqueness_trials(cfg)
    assert abs(summary.uniqueness_rate * summary.trials_run
               - round(summary.uniqueness_rate * summary.trials_run)) < 1e-12


def test_critical_cardinality_histograms():
    summary = run_critical_cardinality(TrialConfig(d=2, n=3, block_dims=(1, 1), trials=20, seed=2))
    assert summary.support_cardinality_histogram == {9: 20}
    assert summary.uniqueness_rate == 1.0
    summary2 = run_critical_cardinality(TrialConfig(d=3, n=2, block_dims=(2, 1), trials=10, seed=4))
    assert summary2.support_cardinality_histogram == {4: 10}
    summary3 = run_critical_cardinality(TrialConfig(d=2, n=1, block_dims=(1, 1), trials=5, seed=5))
    assert summary3.support_cardinality_histogram == {1: 5}


def test_critical_requires_critical_regime():
    with pytest.raises(ConfigError):
        run_critical_cardinality(TrialConfig(d=3, n=3, block_dims=(2, 2), trials=2))


def test_sw_separability_above_dimension():
    summary = run_sw_separability(TrialConfig(d=2, n=3, block_dims=(1, 1, 1), trials=10, seed=6))
    assert summary.uniqueness_rate == 1.0


def test_sw_separability_below_dimension():
    summary = run_sw_separability(TrialConfig(d=3, n=3, block_dims=(1, 1), trials=10, seed=7))
    assert summary.uniqueness_rate == 1.0


def test_sw_separability_at_dimension():
    summary = run_sw_separability(TrialConfig(d=2, n=3, block_dims=(1, 1), trials=10, seed=8))
    assert summary.uniqueness_rate == 1.0


def test_sw_separability_validation():
    with pytest.raises(ConfigError):
        run_sw_separability(TrialConfig(d=3, n=3, block_dims=(2, 1), trials=2))
    with pytest.raises(ConfigError):
        run_sw_separability(TrialConfig(d=2, n=1, block_dims=(1, 1), trials=2))


def test_summaries_deterministic():
    cfg = TrialConfig(d=3, n=3, block_dims=(2, 2), trials=5, seed=9)
    a = summary_to_dict(run_uniqueness_trials(cfg))
    b = summary_to_dict(run_uniqueness_trials(cfg))
    assert a == b
    assert "wall_time" not in a
    assert "wall_time" in summary_to_dict(run_uniqueness_trials(cfg), include_wall_time=True)


def test_config_roundtrip():
    cfg = TrialConfig(d=3, n=4, block_dims=(2, 2), trials=12, seed=5, weight_mode="random")
    again = config_from_dict(config_to_dict(cfg))
    assert again == cfg


def test_config_validation():
    with pytest.raises(ConfigError):
        config_from_dict({"d": 2, "n": 3, "block_dims": [2]})  # block dim not < d
    with pytest.raises(ConfigError):
        run_uniqueness_trials(TrialConfig(d=3, n=3, block_dims=(2, 2), trials=0))
    with pytest.raises(ConfigError):
        run_uniqueness_trials(TrialConfig(d=3, n=3, block_dims=(2, 2), trials=2, seed=-1))


def test_random_weights_still_unique():
    cfg = TrialConfig(d=3, n=3, block_dims=(2, 2), trials=10, seed=13,
                      weight_mode="random")
    assert run_uniqueness_trials(cfg).uniqueness_rate == 1.0


def test_sphere_law_trials():
    cfg = TrialConfig(d=3, n=3, block_dims=(2, 2), law="sphere", trials=10, seed=14)
    assert run_uniqueness_trials(cfg).uniqueness_rate == 1.0

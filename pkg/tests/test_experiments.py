import numpy as np
import pytest

from aircomp_filters.channel import propagate
from aircomp_filters.design import InfeasibleDesignError, matched_filter
from aircomp_filters.experiments import (ExperimentConfig, design_filters, figure_config,
                                         run_point, run_sweep, run_trial, simulate_trial)
from aircomp_filters.receiver import estimate
from aircomp_filters.transmitter import build_waveforms

SMALL = ExperimentConfig(n_devices=8, n_symbols=4, n_copies=3, d_values=(0, 1, 2),
                         n_trials=20, seed=3)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(reg=0.0)
    with pytest.raises(ValueError):
        ExperimentConfig(ns_rule="fixed", ns_fixed=4, d_values=(4,))
    with pytest.raises(ValueError):
        ExperimentConfig(n_copies=0)
    cfg = figure_config(4)
    assert [cfg.n_samples(d) for d in (0, 5, 10)] == [20, 30, 40]
    assert figure_config(3).n_samples(10) == 22


def test_simulate_paths_agree():
    for d in (0, 2):
        _, chan, fast = simulate_trial(SMALL, d, 5)
        frame, _, slow = simulate_trial(SMALL, d, 5, fast=False)
        np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_simulate_matches_modules():
    cfg = SMALL.replace(noise_var=0.0)
    frame, chan, v = simulate_trial(cfg, 2, 1)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 2, 1]))
    rng.uniform(size=frame.messages.shape)
    rng.standard_normal(8), rng.standard_normal(8), rng.integers(0, 2, 8, endpoint=True)
    phases = rng.uniform(0, 2 * np.pi, (8, 3))
    w = build_waveforms(frame, cfg.pulse_for(2), phases, np.abs(chan.h))
    np.testing.assert_allclose(v, propagate(w, chan), atol=1e-12)


def test_trial_noiseless_zero_delay_single_device_is_exact():
    cfg = ExperimentConfig(n_devices=1, n_symbols=6, n_copies=2, d_values=(0,),
                           noise_var=0.0, n_trials=1)
    res = run_trial(cfg, 0, 0)
    assert abs(res["matched"][0]) < 1e-12 and res["matched"][1] < 1e-24


def test_trial_noiseless_zero_delay_error_is_cross_term():
    cfg = ExperimentConfig(n_devices=5, n_symbols=6, n_copies=2, d_values=(0,),
                           noise_var=0.0, n_trials=1)
    frame, chan, v = simulate_trial(cfg, 0, 4)
    f_hat = estimate(v, matched_filter(cfg.pulse_for(0)), 0.0, 5).f_hat
    # only the cross-device term remains, bounded by (1/K) sum_{k != k'} sqrt(x_k x_k')
    amp = np.sqrt(frame.messages)
    bound = (amp.sum(axis=0) ** 2 - (amp**2).sum(axis=0)) / 5
    assert np.all(np.abs(f_hat - frame.target()) <= bound + 1e-12)


def test_trial_is_deterministic():
    a = run_trial(SMALL, 2, 7)
    b = run_trial(SMALL, 2, 7)
    assert a == b
    assert run_trial(SMALL, 2, 8) != a


def test_unbiased_filter_bias_vanishes():
    cfg = ExperimentConfig(n_devices=10, n_symbols=5, n_copies=5, d_values=(3,), noise_var=0.1,
                           n_trials=1500, include_unbiased=True, seed=11, ns_offset=4)
    row = run_point(cfg, 3)
    s = row.stats["unbiased"]
    assert abs(s["bias"]) <= 4 * s["se_bias"]


def test_infeasible_unbiased_raises_before_trials():
    cfg = ExperimentConfig(ns_rule="fixed", ns_fixed=4, d_values=(3,), include_unbiased=True,
                           n_trials=5)
    with pytest.raises(InfeasibleDesignError):
        run_sweep(cfg)


def test_sweep_result_structure():
    res = run_sweep(SMALL)
    assert list(res.d_values) == [0, 1, 2]
    csv = res.to_csv()
    lines = csv.splitlines()
    assert lines[0] == "d,MSE,MSE_mf,bias,bias_mf,se_MSE,se_MSE_mf,se_bias,se_bias_mf"
    assert len(lines) == 4
    for row in res.rows:
        for s in row.stats.values():
            assert s["mse"] >= 0 and np.isfinite(list(s.values())).all()
            assert s["mse"] >= s["bias"] ** 2 - 4 * s["se_bias"]
            assert s["mse"] >= s["mse_sqmean"] - 1e-12  # Jensen, per trial
    ext = res.to_csv(extended=True).splitlines()[0]
    assert ext.endswith("n_s,MSE_sqmean,MSE_sqmean_mf")


def test_paired_filters_share_draws():
    cfg = SMALL.replace(n_trials=1)
    frame, chan, v = simulate_trial(cfg, 1, 0)
    res = run_trial(cfg, 1, 0)
    filters = design_filters(cfg, 1)
    for name, filt in filters.items():
        err = frame.target() - estimate(v, filt, cfg.noise_var, cfg.n_devices).f_hat
        assert res[name] == (pytest.approx(err.mean()), pytest.approx(np.mean(err**2)))


def test_thread_count_does_not_change_results():
    cfg = SMALL.replace(n_trials=37)
    one = run_sweep(cfg, threads=1).to_csv(extended=True)
    three = run_sweep(cfg, threads=3).to_csv(extended=True)
    assert one == three


def test_fixed_delays_option():
    cfg = SMALL.replace(n_devices=30, resample_delays=False)
    fixed = [simulate_trial(cfg, 2, j)[1].delays for j in range(4)]
    assert all(np.array_equal(fixed[0], x) for x in fixed)
    fresh = [simulate_trial(cfg.replace(resample_delays=True), 2, j)[1].delays for j in range(4)]
    assert not all(np.array_equal(fresh[0], x) for x in fresh)

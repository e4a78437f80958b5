import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from aircomp_filters import AirCompReceiver
from aircomp_filters.channel import ChannelRealization
from aircomp_filters.design import InfeasibleDesignError
from aircomp_filters.experiments import sample_estimates
from aircomp_filters.signal import PulseShape, pulse_shape, upsample
from aircomp_filters.transmitter import Frame


def test_params_roundtrip_and_clone():
    rx = AirCompReceiver(design="matched", max_delay=2, reg=0.5, noise_var=1.0, n_devices=7)
    params = rx.get_params()
    assert params == {"design": "matched", "max_delay": 2, "reg": 0.5, "noise_var": 1.0,
                      "n_devices": 7}
    twin = clone(rx)
    assert twin.get_params() == params and twin is not rx
    rx.set_params(reg=2.0)
    assert rx.reg == 2.0


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        AirCompReceiver().transform(np.zeros(4))


def test_fit_designs_taps():
    rx = AirCompReceiver(design="tikhonov", max_delay=2).fit(PulseShape.rectangular(4))
    np.testing.assert_allclose(rx.filter_.taps, [0, 0, 0.9375, 0.9375])
    assert rx.n_features_in_ == 4 and rx.feasibility_.feasible
    rx = AirCompReceiver(design="unbiased_exact", max_delay=2).fit([0.5, 0.5, 0.5, 0.5])
    np.testing.assert_allclose(rx.filter_.taps, [0, 0, 1, 1], atol=1e-12)
    with pytest.raises(InfeasibleDesignError):
        AirCompReceiver(design="unbiased_exact", max_delay=3).fit(PulseShape.gaussian(4))
    with pytest.raises(ValueError):
        AirCompReceiver().fit(np.ones((2, 3)))


def test_transform_and_input_checks():
    g = PulseShape.gaussian(6)
    rx = AirCompReceiver(design="matched").fit(g)
    v = pulse_shape(upsample([2.0, -1.0], 6), g)
    np.testing.assert_allclose(rx.transform(v), [2.0, -1.0], atol=1e-12)
    np.testing.assert_allclose(rx.transform(np.stack([v, 2 * v])), [[2, -1], [4, -2]], atol=1e-12)
    with pytest.raises(ValueError):
        rx.transform(np.ones(7))
    with pytest.raises(ValueError):
        rx.transform(np.full(6, np.nan))
    with pytest.raises(TypeError):
        rx.transform(np.array(["a"] * 6))


def test_predict_matches_expected_on_average():
    rng = np.random.default_rng(12)
    g = PulseShape.gaussian(10)
    rx = AirCompReceiver(max_delay=3, noise_var=0.5, n_devices=4).fit(g)
    frame = Frame.random(rng, 4, 3)
    chan = ChannelRealization([0, 3, 1, 2], np.ones(4), 0.5, 3)
    draws = sample_estimates(frame, chan, g, {"rx": rx.filter_}, 5, 20_000, rng)["rx"]
    se = draws.std(axis=0, ddof=1) / np.sqrt(draws.shape[0])
    assert np.all(np.abs(draws.mean(axis=0) - rx.expected(frame, chan.delays)) <= 4 * se)


def test_predict_and_score_single_device():
    g = PulseShape.rectangular(4)
    rx = AirCompReceiver(design="matched").fit(g)
    v = pulse_shape(upsample(np.sqrt([1.0, 2.0]) * np.exp(0.3j), 4), g)
    np.testing.assert_allclose(rx.predict(v), [1.0, 2.0], atol=1e-12)
    assert rx.score(v, [1.0, 2.0]) == pytest.approx(0.0, abs=1e-20)
    assert rx.score(v, [0.0, 2.0]) == pytest.approx(-0.5)

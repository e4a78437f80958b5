"""scikit-learn style front end.

``AirCompReceiver`` is fitted on a pulse shape (it designs the receive taps)
and then transforms received sample streams into filtered symbols or
predicts the per-symbol mean of the transmitted messages::

    rx = AirCompReceiver(design="tikhonov", max_delay=3, reg=0.1,
                         noise_var=1.0, n_devices=100).fit(pulse)
    f_hat = rx.predict(received_copies)
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_pulse, check_samples
from .design import check_feasibility, design_filter
from .receiver import apply_filter, estimate, expected_estimate


class AirCompReceiver(TransformerMixin, BaseEstimator):
    """Receive filter plus squared-magnitude mean estimator.

    Parameters
    ----------
    design : {'tikhonov', 'unbiased_exact', 'matched'}
    max_delay : int
        Largest delay (in samples) the filter must tolerate.
    reg : float
        Tikhonov weight; ignored by the other designs.
    noise_var : float
        Per-sample complex noise power used for the noise-floor correction.
    n_devices : int
        Number of superimposed devices ``K``.

    Attributes
    ----------
    pulse_ : PulseShape
    filter_ : ReceiveFilter
    feasibility_ : FeasibilityReport
    """

    def __init__(self, design="tikhonov", max_delay=0, reg=0.1, noise_var=0.0, n_devices=1):
        self.design = design
        self.max_delay = max_delay
        self.reg = reg
        self.noise_var = noise_var
        self.n_devices = n_devices

    def fit(self, X, y=None):
        """Design the taps for pulse ``X`` (a ``PulseShape`` or 1-D tap array)."""
        pulse = check_pulse(X)
        self.pulse_ = pulse
        self.feasibility_ = check_feasibility(pulse, self.max_delay)
        self.filter_ = design_filter(pulse, self.max_delay, self.design, self.reg)
        self.n_features_in_ = pulse.n_samples
        return self

    def transform(self, X):
        """Filter sample streams of shape ``(..., N * N_s)`` into ``(..., N)``."""
        check_is_fitted(self, "filter_")
        return apply_filter(check_samples(X, self.filter_.n_samples), self.filter_)

    def predict(self, X):
        """Noise-corrected estimate of the per-symbol mean from ``(M, N * N_s)`` copies."""
        check_is_fitted(self, "filter_")
        copies = np.atleast_2d(check_samples(X, self.filter_.n_samples))
        return estimate(copies, self.filter_, self.noise_var, self.n_devices).f_hat

    def expected(self, frame, delays):
        """Closed-form mean of :meth:`predict` for fixed messages and delays."""
        check_is_fitted(self, "filter_")
        return expected_estimate(frame, self.filter_, self.pulse_, delays)

    def score(self, X, y):
        """Negative mean squared error of :meth:`predict` against target means ``y``."""
        err = self.predict(X) - np.asarray(y, dtype=float)
        return -float(np.mean(err**2))

"""Input checks shared by the estimator front end."""
from __future__ import annotations

import numpy as np

from .signal import PulseShape


def check_pulse(X) -> PulseShape:
    if isinstance(X, PulseShape):
        return X
    taps = np.asarray(X, dtype=float)
    if taps.ndim == 2 and 1 in taps.shape:
        taps = taps.ravel()
    if taps.ndim != 1:
        raise ValueError(f"expected a 1-D array of pulse taps, got shape {taps.shape}")
    return PulseShape(taps)


def check_samples(X, samples_per_symbol: int) -> np.ndarray:
    X = np.asarray(X)
    if not (np.issubdtype(X.dtype, np.number) or X.dtype == bool):
        raise TypeError(f"samples must be numeric, got dtype {X.dtype}")
    if X.ndim == 0:
        raise ValueError("samples must be at least 1-D")
    if X.shape[-1] == 0 or X.shape[-1] % samples_per_symbol:
        raise ValueError(
            f"last axis has {X.shape[-1]} samples, not a positive multiple of "
            f"N_s={samples_per_symbol}")
    if not np.all(np.isfinite(X)):
        raise ValueError("samples contain NaN or inf")
    return X

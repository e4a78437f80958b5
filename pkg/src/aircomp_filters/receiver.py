"""Fusion-centre processing: filtering, squared-magnitude estimation, oracles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import ReceiveFilter, lemma1_table
from .signal import PulseShape, pulse_matrix, shift_matrix
from .transmitter import Frame


@dataclass(frozen=True)
class FunctionEstimate:
    f_hat: np.ndarray
    f_hat_raw: np.ndarray
    correction: float


def apply_filter(v, filt: ReceiveFilter) -> np.ndarray:
    """Inner product of the taps with every ``N_s``-sample slot of ``v``.

    Works on the last axis, so ``(M, N_t)`` input gives ``(M, N)`` output.
    """
    v = np.asarray(v)
    n_s = filt.n_samples
    if v.shape[-1] % n_s:
        raise ValueError(f"signal length {v.shape[-1]} is not a multiple of N_s={n_s}")
    return v.reshape(v.shape[:-1] + (-1, n_s)) @ filt.taps


def noise_correction(filt: ReceiveFilter, noise_var: float, n_devices: int) -> float:
    return filt.noise_gain * noise_var / n_devices


def estimate_from_filtered(y, filt: ReceiveFilter, noise_var: float, n_devices: int) -> FunctionEstimate:
    y = np.atleast_2d(y)
    if y.shape[0] < 1:
        raise ValueError("need at least one received copy")
    if noise_var < 0 or n_devices < 1:
        raise ValueError("noise_var must be >= 0 and n_devices >= 1")
    raw = np.mean(y.real**2 + y.imag**2, axis=0) / n_devices
    corr = noise_correction(filt, noise_var, n_devices)
    return FunctionEstimate(raw - corr, raw, corr)


def estimate(copies, filt: ReceiveFilter, noise_var: float, n_devices: int) -> FunctionEstimate:
    """Average ``|y|^2`` over the ``M`` received copies and remove the noise floor.

    ``copies`` has shape ``(M, N_t)``.
    """
    copies = np.atleast_2d(copies)
    if copies.shape[0] == 0:
        raise ValueError("need at least one received copy")
    return estimate_from_filtered(apply_filter(copies, filt), filt, noise_var, n_devices)


def _frame_messages(frame) -> np.ndarray:
    return frame.messages if isinstance(frame, Frame) else np.atleast_2d(np.asarray(frame, dtype=float))


def expected_estimate(frame, filt: ReceiveFilter, g: PulseShape, delays) -> np.ndarray:
    """Mean of the corrected estimate over phases and noise at fixed delays.

    Each device contributes ``(c_k sqrt(x_k[n]) + r_k sqrt(x_k[n-1]))^2 / K``;
    there is no previous symbol for ``n = 0``.
    """
    x = _frame_messages(frame)
    delays = np.asarray(delays, dtype=int).ravel()
    if delays.size != x.shape[0]:
        raise ValueError(f"need {x.shape[0]} delays, got {delays.size}")
    cr = lemma1_table(filt, g, delays)
    amp = np.sqrt(x)
    prev = np.zeros_like(amp)
    prev[:, 1:] = amp[:, :-1]
    per_device = cr[:, :1] * amp + cr[:, 1:] * prev
    return np.mean(per_device**2, axis=0)


def expected_estimate_explicit(frame, filt: ReceiveFilter, g: PulseShape, delays) -> np.ndarray:
    """Same expectation from the full quadratic form with explicit matrices.

    Cost grows as ``(N N_s)^2``; meant as a cross-check at small sizes.
    """
    x = _frame_messages(frame)
    delays = np.asarray(delays, dtype=int).ravel()
    K, N = x.shape
    n_t = N * filt.n_samples
    G = pulse_matrix(g, N)
    A = filt.matrix(N)
    Q = np.zeros((n_t, n_t))
    for k in range(K):
        b = shift_matrix(n_t, delays[k]) @ G @ np.sqrt(x[k])
        Q += np.outer(b, b)
    return np.einsum("ni,ij,nj->n", A, Q, A) / K

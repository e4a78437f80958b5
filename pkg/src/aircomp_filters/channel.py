"""Asynchronous multiple-access channel with flat Rayleigh fading and AWGN."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelRealization:
    """Per-device integer delays and fading coefficients for one frame."""

    delays: np.ndarray
    h: np.ndarray
    noise_var: float = 0.0
    max_delay: int = 0

    def __post_init__(self):
        delays = np.atleast_1d(np.asarray(self.delays))
        h = np.atleast_1d(np.asarray(self.h, dtype=complex))
        if delays.shape != h.shape or delays.ndim != 1:
            raise ValueError("delays and h must be 1-D arrays of equal length")
        if not np.all(delays == np.round(delays)):
            raise ValueError("delays must be integers")
        delays = delays.astype(int)
        if np.any(delays < 0) or np.any(delays > self.max_delay):
            raise ValueError(f"delays must lie in [0, {self.max_delay}]")
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")
        delays.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "delays", delays)
        object.__setattr__(self, "h", h)

    @property
    def n_devices(self) -> int:
        return self.delays.size


def sample_channel(rng: np.random.Generator, n_devices: int, max_delay: int,
                   noise_var: float = 0.0) -> ChannelRealization:
    """Draw ``h_k ~ CN(0, 1)`` and delays uniform on ``{0, ..., max_delay}``."""
    if n_devices < 1:
        raise ValueError("need at least one device")
    if max_delay < 0:
        raise ValueError("max_delay must be nonnegative")
    h = (rng.standard_normal(n_devices) + 1j * rng.standard_normal(n_devices)) / np.sqrt(2)
    delays = rng.integers(0, max_delay, size=n_devices, endpoint=True)
    return ChannelRealization(delays, h, noise_var, max_delay)


def complex_noise(rng: np.random.Generator, shape, noise_var: float) -> np.ndarray:
    """Circularly symmetric complex Gaussian with total variance ``noise_var``."""
    scale = np.sqrt(noise_var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def superpose(waveforms, delays, h) -> np.ndarray:
    """Noiseless ``sum_k h_k E^{d_k} s_k`` along the device axis (axis 0).

    ``waveforms`` has shape ``(K, ..., N_t)``; the result drops axis 0.
    """
    waveforms = np.asarray(waveforms)
    delays = np.asarray(delays, dtype=int)
    n_t = waveforms.shape[-1]
    if waveforms.shape[0] != delays.size or np.size(h) != delays.size:
        raise ValueError("one delay and one coefficient per waveform are required")
    if np.any(delays >= n_t):
        raise ValueError(f"delays must be shorter than the waveform length {n_t}")
    h = np.asarray(h, dtype=complex)
    out = np.zeros(waveforms.shape[1:], dtype=complex)
    # devices sharing a delay are summed first, then shifted once
    for dk in np.unique(delays):
        idx = np.flatnonzero(delays == dk)
        out[..., dk:] += np.tensordot(h[idx], waveforms[idx, ..., : n_t - dk], axes=1)
    return out


def superpose_rotated(base, phases, delays, h) -> np.ndarray:
    """Noiseless superposition when copy ``m`` of device ``k`` is ``base[k] * exp(1j phases[k, m])``.

    Equal to ``superpose(base[:, None] * exp(1j * phases)[..., None], delays, h)``
    but shifts each device once and mixes the copies with one matrix product.
    Returns shape ``(M, N_t)``.
    """
    base = np.asarray(base)
    delays = np.asarray(delays, dtype=int)
    K, n_t = base.shape
    if np.any(delays >= n_t) or np.any(delays < 0):
        raise ValueError(f"delays must lie in [0, {n_t})")
    src = np.arange(n_t)[None, :] - delays[:, None]
    shifted = np.where(src >= 0, base[np.arange(K)[:, None], np.maximum(src, 0)], 0.0)
    weights = np.asarray(h)[:, None] * np.exp(1j * np.asarray(phases, dtype=float))
    return weights.T @ shifted


def propagate(waveforms, chan: ChannelRealization, rng: np.random.Generator | None = None):
    """Received samples for every phase copy.

    ``waveforms`` is ``(K, N_t)`` for a single copy or ``(K, M, N_t)``;
    each copy gets fresh noise of variance ``chan.noise_var``.
    """
    v = superpose(waveforms, chan.delays, chan.h)
    if chan.noise_var > 0:
        if rng is None:
            raise ValueError("an rng is required when noise_var > 0")
        v = v + complex_noise(rng, v.shape, chan.noise_var)
    return v

"""Discrete-signal algebra: pulses, Hankel lifting, delay shifts, upsampling.

All vectors are 0-based. The 1-based Hankel definition

    H(x) = [[x_{d+1}, ..., x_L],
            [x_d,     ..., x_{L-1}],
            ...
            [x_1,     ..., x_{L-d}]]

becomes ``H[r, c] = x[d - r + c]`` here, and symbol ``n`` of an upsampled
train sits at sample ``n * samples_per_symbol``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

PulseKind = Literal["rectangular", "gaussian", "custom"]


@dataclass(frozen=True)
class PulseShape:
    """Real transmit pulse with ``N_s`` taps."""

    taps: np.ndarray
    kind: PulseKind = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float).ravel()
        if taps.size < 1:
            raise ValueError("a pulse needs at least one tap")
        if not np.all(np.isfinite(taps)):
            raise ValueError("pulse taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def n_samples(self) -> int:
        return self.taps.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.taps))

    @classmethod
    def rectangular(cls, n_samples: int) -> "PulseShape":
        """Constant pulse ``1/sqrt(N_s)`` (unit energy)."""
        n_samples = _check_positive_int(n_samples, "n_samples")
        return cls(np.full(n_samples, 1.0 / np.sqrt(n_samples)), "rectangular")

    @classmethod
    def gaussian(cls, n_samples: int, width: float | None = None) -> "PulseShape":
        """Sampled Gaussian centred on the symbol slot, unit energy.

        ``width`` is the standard deviation in samples and defaults to
        ``N_s / 6`` so the slot spans +-3 standard deviations.
        """
        n_samples = _check_positive_int(n_samples, "n_samples")
        sigma = n_samples / 6.0 if width is None else float(width)
        if sigma <= 0:
            raise ValueError(f"width must be positive, got {width}")
        i = np.arange(n_samples)
        mu = (n_samples - 1) / 2.0
        taps = np.exp(-((i - mu) ** 2) / (2.0 * sigma**2))
        taps /= np.linalg.norm(taps)
        return cls(taps, "gaussian", {"width": sigma})

    @classmethod
    def from_spec(cls, kind: str, n_samples: int) -> "PulseShape":
        kind = kind.lower()
        if kind in ("rect", "rectangular"):
            return cls.rectangular(n_samples)
        if kind in ("gauss", "gaussian"):
            return cls.gaussian(n_samples)
        raise ValueError(f"unknown pulse kind {kind!r}; use 'rect' or 'gaussian'")


def _check_positive_int(value, name: str) -> int:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def _as_taps(g) -> np.ndarray:
    return g.taps if isinstance(g, PulseShape) else np.asarray(g, dtype=float)


def hankel_lift(x, d: int) -> np.ndarray:
    """Stack the delay windows of ``x`` into a ``(d+1, L-d)`` Hankel matrix.

    Row ``r`` is ``x[d-r : L-r]``, so row 0 is the window for no delay
    and row ``d`` starts at ``x[0]``.
    """
    x = np.asarray(_as_taps(x), dtype=float).ravel()
    L = x.size
    if int(d) != d or not 0 <= d <= L - 1:
        raise ValueError(f"d must be an integer in [0, {L - 1}], got {d!r}")
    d = int(d)
    rows = d - np.arange(d + 1)[:, None] + np.arange(L - d)[None, :]
    return x[rows]


def shift(s, delay: int) -> np.ndarray:
    """Delay ``s`` by ``delay`` samples along the last axis (``E^delay @ s``).

    Samples pushed past the end are dropped; the head is zero-filled.
    """
    s = np.asarray(s)
    length = s.shape[-1]
    if int(delay) != delay or delay < 0:
        raise ValueError(f"delay must be a nonnegative integer, got {delay!r}")
    if delay >= length:
        raise ValueError(f"delay {delay} must be shorter than the signal ({length})")
    delay = int(delay)
    out = np.zeros_like(s)
    out[..., delay:] = s[..., : length - delay]
    return out


def upsample(symbols, samples_per_symbol: int) -> np.ndarray:
    """Zero-stuff ``symbols`` by an integer factor along the last axis."""
    symbols = np.asarray(symbols)
    n_s = _check_positive_int(samples_per_symbol, "samples_per_symbol")
    if symbols.shape[-1] < 1:
        raise ValueError("need at least one symbol")
    out = np.zeros(symbols.shape[:-1] + (symbols.shape[-1] * n_s,), dtype=symbols.dtype)
    out[..., ::n_s] = symbols
    return out


def pulse_shape(u, g) -> np.ndarray:
    """Convolve an upsampled train with ``g``, i.e. ``(I_N kron g) @ symbols``.

    Symbol slots do not overlap, so each nonzero sample at ``n * N_s`` is
    replaced by a scaled copy of ``g`` occupying its own slot.
    """
    taps = _as_taps(g)
    u = np.asarray(u)
    n_s = taps.size
    if u.shape[-1] % n_s:
        raise ValueError(f"signal length {u.shape[-1]} is not a multiple of N_s={n_s}")
    blocks = u.reshape(u.shape[:-1] + (-1, n_s))
    if np.any(blocks[..., 1:] != 0):
        raise ValueError("input is not an upsampled train for this N_s")
    return modulate_blocks(blocks[..., 0], taps)


def modulate_blocks(symbols, g) -> np.ndarray:
    """``(I_N kron g) @ symbols`` along the last axis, without the zero-stuffing."""
    taps = _as_taps(g)
    symbols = np.asarray(symbols)
    out = symbols[..., :, None] * taps
    return out.reshape(symbols.shape[:-1] + (-1,))


def shift_matrix(size: int, power: int = 1) -> np.ndarray:
    """Explicit down-shift matrix ``E**power``; for small-size cross-checks only."""
    return np.linalg.matrix_power(np.eye(size, k=-1), power)


def pulse_matrix(g, n_symbols: int) -> np.ndarray:
    """Explicit ``I_N kron g`` of shape ``(N * N_s, N)``."""
    return np.kron(np.eye(n_symbols), _as_taps(g)[:, None])

"""Device-side waveform construction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import PulseShape, modulate_blocks


@dataclass(frozen=True)
class Frame:
    """``K x N`` matrix of nonnegative messages drawn from ``[x_min, x_max]``."""

    messages: np.ndarray
    x_min: float = 0.0
    x_max: float = 3.0

    def __post_init__(self):
        x = np.atleast_2d(np.array(self.messages, dtype=float))
        if x.ndim != 2:
            raise ValueError("messages must be a K x N matrix")
        if self.x_min < 0 or self.x_max < self.x_min:
            raise ValueError(f"invalid message domain [{self.x_min}, {self.x_max}]")
        if np.any(x < self.x_min) or np.any(x > self.x_max):
            raise ValueError(f"messages must lie in [{self.x_min}, {self.x_max}]")
        x.setflags(write=False)
        object.__setattr__(self, "messages", x)

    @property
    def n_devices(self) -> int:
        return self.messages.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.messages.shape[1]

    def target(self) -> np.ndarray:
        """Arithmetic mean over devices, one value per symbol."""
        return self.messages.mean(axis=0)

    @classmethod
    def random(cls, rng: np.random.Generator, n_devices: int, n_symbols: int,
               x_min: float = 0.0, x_max: float = 3.0) -> "Frame":
        return cls(rng.uniform(x_min, x_max, size=(n_devices, n_symbols)), x_min, x_max)


def random_phases(rng: np.random.Generator, n_devices: int, n_copies: int) -> np.ndarray:
    """``K x M`` i.i.d. phases on ``[0, 2*pi)``."""
    return rng.uniform(0.0, 2 * np.pi, size=(n_devices, n_copies))


def modulate(x, h_mag) -> np.ndarray:
    """Square-root amplitude modulation with magnitude pre-equalisation."""
    x = np.asarray(x, dtype=float)
    h_mag = np.asarray(h_mag, dtype=float)
    if np.any(x < 0):
        raise ValueError("messages must be nonnegative")
    if np.any(h_mag <= 0):
        raise ValueError("channel magnitudes must be positive")
    return np.sqrt(x) / h_mag


def build_waveforms(frame: Frame, g: PulseShape, phases, h_mags) -> np.ndarray:
    """Baseband waveforms of every device and phase copy.

    Returns a complex array of shape ``(K, M, N * N_s)`` where entry
    ``[k, m]`` is ``(I_N kron g) @ modulate(x_k) * exp(1j * theta[k, m])``.
    """
    phases = np.atleast_2d(np.asarray(phases, dtype=float))
    h_mags = np.atleast_1d(np.asarray(h_mags, dtype=float))
    K = frame.n_devices
    if phases.shape[0] != K or h_mags.shape != (K,):
        raise ValueError(
            f"expected {K} phase rows and {K} channel magnitudes, "
            f"got {phases.shape} and {h_mags.shape}")
    base = modulate_blocks(modulate(frame.messages, h_mags[:, None]), g)
    return base[:, None, :] * np.exp(1j * phases)[:, :, None]

"""Receive filter design for delay-robust squared-magnitude aggregation.

A receive filter applies the same ``N_s`` taps ``a`` to every symbol slot.
For a device delayed by ``d_k`` samples, filtering slot ``n`` picks up

    c_k = sum_{i >= d_k} a[i] g[i - d_k]            (current symbol)
    r_k = sum_{i <  d_k} a[i] g[i + N_s - d_k]      (previous symbol)

The estimate is unbiased for every delay up to ``d`` when ``c_k = 1`` and
``r_k = 0`` for all ``d_k <= d``. Forcing the first ``d`` taps to zero kills
``r_k`` and reduces ``c_k = 1`` to the Hankel system ``H(g) @ alpha = 1``
on the trailing taps ``alpha = a[d:]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import linalg

from .signal import PulseShape, hankel_lift, pulse_matrix, shift_matrix

Design = Literal["matched", "unbiased_exact", "tikhonov"]

#: residual bound on ``||H alpha - 1||_inf`` for an exact (unbiased) solution
RESIDUAL_TOL = 1e-9


class InfeasibleDesignError(ValueError):
    """No tap vector makes the estimator unbiased for this pulse and delay bound."""

    def __init__(self, report: "FeasibilityReport"):
        self.report = report
        super().__init__(
            f"no unbiased filter for N_s={report.n_samples}, d={report.max_delay}: "
            f"rank(H)={report.rank_h}, best residual {report.residual:.3g} "
            f"> {report.residual_tol:g}")


@dataclass(frozen=True)
class ReceiveFilter:
    """Per-symbol receive taps plus how they were obtained.

    Attributes
    ----------
    taps : ndarray of shape (N_s,)
        The per-slot taps; row ``n`` of the full filter is ``e_n kron taps``.
    max_delay : int
        Delay bound ``d`` the filter was designed for (0 for matched).
    design : {'matched', 'unbiased_exact', 'tikhonov'}
    reg : float or None
        Tikhonov weight, when ``design == 'tikhonov'``.
    """

    taps: np.ndarray
    max_delay: int = 0
    design: Design = "matched"
    reg: float | None = None

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float).ravel()
        if not 0 <= self.max_delay < taps.size:
            raise ValueError(f"max_delay must be in [0, {taps.size - 1}]")
        if self.design != "matched" and np.any(taps[: self.max_delay] != 0):
            raise ValueError("designed filters must have zero leading taps")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def n_samples(self) -> int:
        return self.taps.size

    @property
    def alpha(self) -> np.ndarray:
        """Trailing taps ``a[d:]``."""
        return self.taps[self.max_delay:]

    @property
    def beta(self) -> np.ndarray:
        """Leading taps ``a[:d]`` (zero for designed filters)."""
        return self.taps[: self.max_delay]

    @property
    def noise_gain(self) -> float:
        """``||a||^2``, the factor on the noise power after filtering."""
        return float(self.taps @ self.taps)

    def row(self, n: int, n_symbols: int) -> np.ndarray:
        """Row ``n`` of the full ``N x N_t`` filter matrix (small sizes only)."""
        e = np.zeros(n_symbols)
        e[n] = 1.0
        return np.kron(e, self.taps)

    def matrix(self, n_symbols: int) -> np.ndarray:
        return np.kron(np.eye(n_symbols), self.taps[None, :])


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the unbiasedness feasibility test.

    ``feasible`` is the exact-solvability verdict (``1`` lies in the range of
    ``H(g)``). ``rank_condition`` records ``N_s >= d + rank(H)``, which is
    necessary but holds for every pulse since ``rank(H) <= N_s - d``.
    """

    rank_h: int
    n_samples: int
    max_delay: int
    feasible: bool
    rank_tolerance: float
    rank_condition: bool
    residual: float
    residual_tol: float
    corollary2_bound: int
    corollary2_sufficient: bool

    def as_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "d": self.max_delay,
            "rank": self.rank_h,
            "rank_tolerance": self.rank_tolerance,
            "rank_condition": self.rank_condition,
            "residual": self.residual,
            "feasible": self.feasible,
            "corollary2_bound": self.corollary2_bound,
            "sufficient": self.corollary2_sufficient,
        }


def _taps(g) -> np.ndarray:
    return g.taps if isinstance(g, PulseShape) else np.asarray(g, dtype=float).ravel()


def _check_delay(d, n_samples: int) -> int:
    if int(d) != d or not 0 <= d <= n_samples - 1:
        raise ValueError(f"d must be an integer in [0, {n_samples - 1}], got {d!r}")
    return int(d)


def default_rank_tolerance(sigma_max: float, shape) -> float:
    return sigma_max * max(shape) * np.finfo(float).eps


def _min_norm_solution(H, rank_tol=None):
    U, s, Vt = np.linalg.svd(H, full_matrices=False)
    tol = default_rank_tolerance(s[0] if s.size else 0.0, H.shape) if rank_tol is None else rank_tol
    keep = s > tol
    rhs = np.ones(H.shape[0])
    alpha = Vt[keep].T @ ((U[:, keep].T @ rhs) / s[keep])
    return alpha, int(keep.sum()), tol


def matched_filter(g) -> ReceiveFilter:
    return ReceiveFilter(_taps(g).copy(), 0, "matched")


def check_feasibility(g, d: int, rank_tol: float | None = None,
                      residual_tol: float = RESIDUAL_TOL) -> FeasibilityReport:
    """Decide whether ``H(g) @ alpha = 1_{d+1}`` has a solution.

    The numerical rank uses singular values above
    ``sigma_max * max(H.shape) * eps`` unless ``rank_tol`` is given.
    """
    taps = _taps(g)
    n_s = taps.size
    d = _check_delay(d, n_s)
    H = hankel_lift(taps, d)
    alpha, rank, tol = _min_norm_solution(H, rank_tol)
    residual = float(np.max(np.abs(H @ alpha - 1.0)))
    bound = (n_s - 1) // 2
    return FeasibilityReport(
        rank_h=rank,
        n_samples=n_s,
        max_delay=d,
        feasible=bool(residual <= residual_tol and n_s >= d + rank),
        rank_tolerance=float(tol),
        rank_condition=bool(n_s >= d + rank),
        residual=residual,
        residual_tol=residual_tol,
        corollary2_bound=bound,
        corollary2_sufficient=bool(d <= bound),
    )


def solve_unbiased(g, d: int, rank_tol: float | None = None,
                   residual_tol: float = RESIDUAL_TOL) -> ReceiveFilter:
    """Minimum-norm taps that are exactly unbiased for every delay ``<= d``.

    Raises
    ------
    InfeasibleDesignError
        If no exact solution exists (residual above ``residual_tol``).
    """
    taps = _taps(g)
    d = _check_delay(d, taps.size)
    report = check_feasibility(taps, d, rank_tol, residual_tol)
    if not report.feasible:
        raise InfeasibleDesignError(report)
    alpha, _, _ = _min_norm_solution(hankel_lift(taps, d), rank_tol)
    return ReceiveFilter(np.concatenate([np.zeros(d), alpha]), d, "unbiased_exact")


def tikhonov_alpha(H, reg: float) -> np.ndarray:
    """``(H^T H + reg I)^{-1} H^T 1`` via a Cholesky solve."""
    if not reg > 0:
        raise ValueError(f"regularisation weight must be positive, got {reg!r}")
    gram = H.T @ H + reg * np.eye(H.shape[1])
    return linalg.solve(gram, H.T @ np.ones(H.shape[0]), assume_a="pos")


def solve_tikhonov(g, d: int, reg: float = 0.1) -> ReceiveFilter:
    """Taps minimising ``||H(g) alpha - 1||^2 + reg ||alpha||^2``."""
    taps = _taps(g)
    d = _check_delay(d, taps.size)
    alpha = tikhonov_alpha(hankel_lift(taps, d), reg)
    return ReceiveFilter(np.concatenate([np.zeros(d), alpha]), d, "tikhonov", float(reg))


def tikhonov_objective(g, d: int, alpha, reg: float) -> float:
    H = hankel_lift(_taps(g), d)
    res = H @ np.asarray(alpha) - 1.0
    return float(res @ res + reg * np.dot(alpha, alpha))


def design_filter(g, d: int, design: Design = "tikhonov", reg: float = 0.1) -> ReceiveFilter:
    if design == "matched":
        return matched_filter(g)
    if design == "unbiased_exact":
        return solve_unbiased(g, d)
    if design == "tikhonov":
        return solve_tikhonov(g, d, reg)
    raise ValueError(f"unknown design {design!r}")


def lemma1_coeffs(filt, g, delay: int) -> tuple[float, float]:
    """Gains ``(c, r)`` a delayed device sees on the current and previous symbol.

    ``c`` pairs the taps with the pulse delayed by ``delay``; ``r`` pairs the
    leading ``delay`` taps with the tail of the previous symbol's pulse that
    spills into the window. Valid for any taps, not only designed ones.
    """
    a = filt.taps if isinstance(filt, ReceiveFilter) else np.asarray(filt, dtype=float)
    taps = _taps(g)
    n_s = taps.size
    if a.size != n_s:
        raise ValueError(f"filter has {a.size} taps, pulse has {n_s}")
    delay = _check_delay(delay, n_s)
    c = float(a[delay:] @ taps[: n_s - delay])
    r = float(a[:delay] @ taps[n_s - delay:])
    return c, r


def lemma1_table(filt, g, delays) -> np.ndarray:
    """``(len(delays), 2)`` array of ``(c, r)`` pairs."""
    return np.array([lemma1_coeffs(filt, g, int(dk)) for dk in np.ravel(delays)]).reshape(-1, 2)


def lemma1_discrepancy(g, taps, n: int, delay: int, n_symbols: int) -> float:
    """``max |a_n^T E^delay G - (c e_n + r e_{n-1})|`` with explicit matrices.

    For the first symbol there is no previous slot; its leakage term is dropped.
    """
    g_taps = _taps(g)
    a = np.asarray(taps, dtype=float)
    n_t = n_symbols * g_taps.size
    e_n = np.zeros(n_symbols)
    e_n[n] = 1.0
    direct = np.kron(e_n, a) @ shift_matrix(n_t, delay) @ pulse_matrix(g_taps, n_symbols)
    c, r = lemma1_coeffs(a, g_taps, delay)
    expected = c * e_n
    if n > 0:
        expected[n - 1] += r
    return float(np.max(np.abs(direct - expected)))


def verify_lemma1(trials: int = 1000, rng: np.random.Generator | None = None,
                  max_symbols: int = 5, max_samples: int = 8) -> float:
    """Largest explicit-matrix discrepancy over random pulses, taps, ``n``, delays."""
    rng = np.random.default_rng() if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        n_s = int(rng.integers(1, max_samples, endpoint=True))
        n_sym = int(rng.integers(1, max_symbols, endpoint=True))
        g = rng.standard_normal(n_s)
        a = rng.standard_normal(n_s)
        n = int(rng.integers(0, n_sym))
        delay = int(rng.integers(0, n_s))
        worst = max(worst, lemma1_discrepancy(g, a, n, delay, n_sym))
    return worst

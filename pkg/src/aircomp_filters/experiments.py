"""Monte-Carlo bias/MSE sweeps over the maximum delay."""
from __future__ import annotations

import dataclasses
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, complex_noise, sample_channel, superpose, \
    superpose_rotated
from .design import ReceiveFilter, check_feasibility, InfeasibleDesignError, matched_filter, \
    solve_tikhonov, solve_unbiased
from .receiver import apply_filter, estimate_from_filtered
from .signal import PulseShape, modulate_blocks
from .transmitter import Frame, build_waveforms, modulate, random_phases

THREADS_ENV = "AIRCOMP_THREADS"

@dataclass(frozen=True)
class ExperimentConfig:
    n_devices: int = 100
    n_symbols: int = 10
    n_copies: int = 10
    d_values: tuple = tuple(range(11))
    ns_rule: str = "affine"
    ns_slope: int = 2
    ns_offset: int = 2
    ns_fixed: int | None = None
    reg: float = 0.1
    noise_var: float = 1.0
    x_min: float = 0.0
    x_max: float = 3.0
    pulse: str = "gaussian"
    n_trials: int = 10_000
    seed: int = 0
    resample_delays: bool = True
    include_unbiased: bool = False

    def __post_init__(self):
        object.__setattr__(self, "d_values", tuple(int(d) for d in self.d_values))
        for name in ("n_devices", "n_symbols", "n_copies", "n_trials"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.reg > 0:
            raise ValueError("reg must be positive")
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")
        if not 0 <= self.x_min <= self.x_max:
            raise ValueError("need 0 <= x_min <= x_max")
        if self.ns_rule not in ("affine", "fixed"):
            raise ValueError(f"ns_rule must be 'affine' or 'fixed', got {self.ns_rule!r}")
        if self.ns_rule == "fixed" and self.ns_fixed is None:
            raise ValueError("ns_rule='fixed' needs ns_fixed")
        if not self.d_values:
            raise ValueError("d_values is empty")
        for d in self.d_values:
            if d < 0 or self.n_samples(d) <= d:
                raise ValueError(f"N_s({d}) = {self.n_samples(d)} must exceed d")

    def n_samples(self, d: int) -> int:
        if self.ns_rule == "fixed":
            return int(self.ns_fixed)
        return self.ns_slope * d + self.ns_offset

    def pulse_for(self, d: int) -> PulseShape:
        return PulseShape.from_spec(self.pulse, self.n_samples(d))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["d_values"] = list(self.d_values)
        return out


def figure_config(figure: int, **overrides) -> ExperimentConfig:
    """Preset for the high-delay (3) or low-delay (4) sweep."""
    offsets = {3: 2, 4: 20}
    if figure not in offsets:
        raise ValueError(f"no preset for figure {figure}; choose 3 or 4")
    return ExperimentConfig(ns_rule="affine", ns_slope=2, ns_offset=offsets[figure], **overrides)


def design_filters(config: ExperimentConfig, d: int) -> dict[str, ReceiveFilter]:
    """Filters evaluated at one sweep point; raises before any trial runs."""
    g = config.pulse_for(d)
    filters = {"proposed": solve_tikhonov(g, d, config.reg), "matched": matched_filter(g)}
    if config.include_unbiased:
        filters["unbiased"] = solve_unbiased(g, d)
    return filters


def trial_rng(seed: int, d: int, trial_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, d, trial_index]))


def _fixed_delays(config: ExperimentConfig, d: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, d, 2**32 - 1]))
    return rng.integers(0, d, size=config.n_devices, endpoint=True)


def simulate_trial(config: ExperimentConfig, d: int, trial_index: int, delays=None,
                   fast: bool = True):
    """One pass of the sample-level pipeline.

    Returns ``(frame, channel, received)`` where ``received`` has shape
    ``(M, N * N_s)``. ``fast=False`` materialises every ``(k, m)`` waveform
    before superposing; both paths consume the rng identically.
    """
    rng = trial_rng(config.seed, d, trial_index)
    g = config.pulse_for(d)
    frame = Frame.random(rng, config.n_devices, config.n_symbols, config.x_min, config.x_max)
    chan = sample_channel(rng, config.n_devices, d, config.noise_var)
    if delays is None and not config.resample_delays:
        delays = _fixed_delays(config, d)
    if delays is not None:
        chan = ChannelRealization(delays, chan.h, chan.noise_var, d)
    phases = random_phases(rng, config.n_devices, config.n_copies)
    if fast:
        base = modulate_blocks(modulate(frame.messages, np.abs(chan.h)[:, None]), g)
        received = superpose_rotated(base, phases, chan.delays, chan.h)
    else:
        waveforms = build_waveforms(frame, g, phases, np.abs(chan.h))
        received = superpose(waveforms, chan.delays, chan.h)
    if config.noise_var > 0:
        received = received + complex_noise(rng, received.shape, config.noise_var)
    return frame, chan, received


def run_trial(config: ExperimentConfig, d: int, trial_index: int,
              filters: dict[str, ReceiveFilter] | None = None, delays=None) -> dict:
    """Per-filter ``(mean(f - f_hat), mean((f - f_hat)**2))`` for one trial.

    All filters see the same realisation.
    """
    if filters is None:
        filters = design_filters(config, d)
    frame, _, received = simulate_trial(config, d, trial_index, delays)
    f = frame.target()
    out = {}
    for name, filt in filters.items():
        y = apply_filter(received, filt)
        err = f - estimate_from_filtered(y, filt, config.noise_var, config.n_devices).f_hat
        out[name] = (float(err.mean()), float(np.mean(err**2)))
    return out


@dataclass
class SweepRow:
    d: int
    n_samples: int
    stats: dict = field(default_factory=dict)  # filter -> dict of metrics
    wall_time: float = 0.0

    def get(self, filt: str, metric: str) -> float:
        return self.stats[filt][metric]


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list

    CSV_COLUMNS = ("d", "MSE", "MSE_mf", "bias", "bias_mf",
                   "se_MSE", "se_MSE_mf", "se_bias", "se_bias_mf")
    EXTRA_COLUMNS = ("n_s", "MSE_sqmean", "MSE_sqmean_mf",
                     "bias_ub", "MSE_ub", "se_bias_ub", "se_MSE_ub")

    def column(self, filt: str, metric: str) -> np.ndarray:
        return np.array([row.get(filt, metric) for row in self.rows])

    @property
    def d_values(self) -> np.ndarray:
        return np.array([row.d for row in self.rows])

    def to_csv(self, extended: bool = False) -> str:
        cols = list(self.CSV_COLUMNS)
        if extended:
            cols += [c for c in self.EXTRA_COLUMNS
                     if not c.endswith("_ub") or self.config.include_unbiased]
        lines = [",".join(cols)]
        for row in self.rows:
            values = {"d": row.d, "n_s": row.n_samples}
            for filt, suffix in (("proposed", ""), ("matched", "_mf"), ("unbiased", "_ub")):
                if filt not in row.stats:
                    continue
                s = row.stats[filt]
                values.update({
                    f"MSE{suffix}": s["mse"], f"bias{suffix}": s["bias"],
                    f"se_MSE{suffix}": s["se_mse"], f"se_bias{suffix}": s["se_bias"],
                    f"MSE_sqmean{suffix}": s["mse_sqmean"],
                })
            lines.append(",".join(_fmt(values[c]) for c in cols))
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _summarise(contrib: np.ndarray) -> dict:
    """``contrib`` is ``(n_trials, 2)``: per-trial mean error and mean squared error."""
    n = contrib.shape[0]
    bias_terms, sq_terms = contrib[:, 0], contrib[:, 1]
    ddof = 1 if n > 1 else 0
    return {
        "bias": float(np.sum(bias_terms) / n),
        "mse": float(np.sum(sq_terms) / n),
        "mse_sqmean": float(np.sum(bias_terms**2) / n),
        "se_bias": float(np.std(bias_terms, ddof=ddof) / np.sqrt(n)),
        "se_mse": float(np.std(sq_terms, ddof=ddof) / np.sqrt(n)),
    }


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_point(config: ExperimentConfig, d: int, threads: int | None = None) -> SweepRow:
    """All trials at one delay bound, collected in trial order."""
    start = time.perf_counter()
    filters = design_filters(config, d)
    delays = None if config.resample_delays else _fixed_delays(config, d)
    names = list(filters)
    contrib = np.empty((config.n_trials, len(names), 2))

    def work(indices):
        for j in indices:
            res = run_trial(config, d, j, filters, delays)
            contrib[j] = [res[name] for name in names]

    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        work(range(config.n_trials))
    else:
        chunks = np.array_split(np.arange(config.n_trials), threads * 4)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))
    stats = {name: _summarise(contrib[:, i]) for i, name in enumerate(names)}
    return SweepRow(d, config.n_samples(d), stats, time.perf_counter() - start)


def check_sweep(config: ExperimentConfig) -> None:
    """Fail fast if any filter cannot be designed at any sweep point."""
    for d in config.d_values:
        if config.include_unbiased:
            report = check_feasibility(config.pulse_for(d), d)
            if not report.feasible:
                raise InfeasibleDesignError(report)
        design_filters(config, d)


def run_sweep(config: ExperimentConfig, threads: int | None = None, progress=None) -> SweepResult:
    check_sweep(config)
    rows = []
    for d in config.d_values:
        rows.append(run_point(config, d, threads))
        if progress is not None:
            progress(rows[-1])
    return SweepResult(config, rows)


def sample_estimates(frame: Frame, chan: ChannelRealization, g: PulseShape,
                     filters: dict[str, ReceiveFilter], n_copies: int, n_draws: int,
                     rng: np.random.Generator, batch: int = 5000) -> dict[str, np.ndarray]:
    """Corrected estimates over ``n_draws`` independent phase/noise draws.

    Messages, fading and delays stay fixed. Returns ``{name: (n_draws, N)}``.
    """
    K = frame.n_devices
    base = modulate_blocks(modulate(frame.messages, np.abs(chan.h)[:, None]), g)
    # shift once; only the per-draw phases and noise change
    shifted = np.stack([superpose(base[k:k + 1], chan.delays[k:k + 1], [1.0]) for k in range(K)])
    out = {name: np.empty((n_draws, frame.n_symbols)) for name in filters}
    for start in range(0, n_draws, batch):
        stop = min(n_draws, start + batch)
        theta = rng.uniform(0.0, 2 * np.pi, size=(stop - start, n_copies, K))
        v = (np.asarray(chan.h) * np.exp(1j * theta)) @ shifted
        if chan.noise_var > 0:
            v = v + complex_noise(rng, v.shape, chan.noise_var)
        for name, filt in filters.items():
            y = apply_filter(v, filt)
            raw = np.mean(y.real**2 + y.imag**2, axis=1) / K
            out[name][start:stop] = raw - filt.noise_gain * chan.noise_var / K
    return out

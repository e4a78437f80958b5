"""Receive filters and simulation for misaligned over-the-air computation."""
from .channel import ChannelRealization, propagate, sample_channel
from .design import (FeasibilityReport, InfeasibleDesignError, ReceiveFilter, check_feasibility,
                     lemma1_coeffs, matched_filter, solve_tikhonov, solve_unbiased, verify_lemma1)
from .estimators import AirCompReceiver
from .experiments import ExperimentConfig, SweepResult, figure_config, run_sweep, run_trial
from .receiver import FunctionEstimate, apply_filter, estimate, expected_estimate
from .signal import PulseShape, hankel_lift, pulse_shape, shift, upsample
from .transmitter import Frame, build_waveforms, modulate

__version__ = "0.1.0"

__all__ = [
    "AirCompReceiver", "ChannelRealization", "ExperimentConfig", "FeasibilityReport", "Frame",
    "FunctionEstimate", "InfeasibleDesignError", "PulseShape", "ReceiveFilter", "SweepResult",
    "apply_filter", "build_waveforms", "check_feasibility", "estimate", "expected_estimate",
    "figure_config", "hankel_lift", "lemma1_coeffs", "matched_filter", "modulate", "propagate",
    "pulse_shape", "run_sweep", "run_trial", "sample_channel", "shift", "solve_tikhonov",
    "solve_unbiased", "upsample", "verify_lemma1",
]

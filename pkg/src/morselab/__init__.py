"""Discrete Lyapunov functions and empirical Morse decompositions for
cyclic systems with threshold-type state-dependent delay."""
from ._accel import backend_name
from .delay import DelayKernel, constant_kernel, plateau_kernel, quadratic_kernel, \
    solve_threshold_delay
from .difference import DiscreteSystemSpec, discrete_scan, orbit, v_vector
from .integrator import Trajectory, integrate, lyapunov_series, segment_at
from .lyapunov import LyapunovValue, RegularityVerdict, count_sign_changes, lyapunov_value, \
    regularity_membership, v_signed
from .morse import MorseReport, SeedSpec, check_nstar_consistency, detect_periodic, \
    estimate_omega_level, run_ensemble
from .segment import Segment, constant_segment, from_function, make_segment
from .spectrum import SpectrumReport, analyze, compute_nstar, count_unstable_roots
from .system import CyclicSystemSpec, Nonlinearity, linear, tanh_feedback

__version__ = "0.1.0"

__all__ = [
    "backend_name", "DelayKernel", "constant_kernel", "plateau_kernel", "quadratic_kernel",
    "solve_threshold_delay", "DiscreteSystemSpec", "discrete_scan", "orbit", "v_vector",
    "Trajectory", "integrate", "lyapunov_series", "segment_at", "LyapunovValue",
    "RegularityVerdict", "count_sign_changes", "lyapunov_value", "regularity_membership",
    "v_signed", "MorseReport", "SeedSpec", "check_nstar_consistency", "detect_periodic",
    "estimate_omega_level", "run_ensemble", "Segment", "constant_segment", "from_function",
    "make_segment", "SpectrumReport", "analyze", "compute_nstar", "count_unstable_roots",
    "CyclicSystemSpec", "Nonlinearity", "linear", "tanh_feedback",
]

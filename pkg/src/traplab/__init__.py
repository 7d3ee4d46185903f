"""Trap model on Z with slowly varying trap depths.

Landscapes, the trap-model walk, an exact transition-law oracle, extreme
value tools and reproducible experiments.
"""
from .landscape import (Landscape, LocalisationFrame, PreAsymptoticError, Scaling, level,
                        localisation_frame, scaling_function, scaling_info)
from .pmf import PmfVector, TrapWindow, pmf_at_time, pmf_at_times
from .tails import Family, TailFunction, eval_tail, sample_log_trap, sample_trap
from .walker import PathRecord, simulate_to_time

__version__ = "0.1.0"

__all__ = [
    "Family", "TailFunction", "eval_tail", "sample_trap", "sample_log_trap",
    "Landscape", "LocalisationFrame", "PreAsymptoticError", "Scaling", "level",
    "localisation_frame", "scaling_function", "scaling_info",
    "TrapWindow", "PmfVector", "pmf_at_time", "pmf_at_times",
    "PathRecord", "simulate_to_time", "__version__",
]

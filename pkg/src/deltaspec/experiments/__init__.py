"""Desk-scale versions of the selection experiments and their statistics."""

from ._kernels import USE_JIT
from .simulate import (
    CostResult,
    EmptyPool,
    SimConfig,
    SimResult,
    UndefinedScore,
    rms,
    simulate_fixed_size,
    simulate_to_target,
)
from .stats import mann_whitney_u, vargha_delaney_a12

__all__ = [
    "CostResult",
    "EmptyPool",
    "SimConfig",
    "SimResult",
    "USE_JIT",
    "UndefinedScore",
    "mann_whitney_u",
    "rms",
    "simulate_fixed_size",
    "simulate_to_target",
    "vargha_delaney_a12",
]

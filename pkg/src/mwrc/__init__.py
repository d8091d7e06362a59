"""Correlated sources over the finite-field multi-way relay channel.

I-measure atoms, the ABCMI test, atom-based source-coding rates, the
achievable-rate threshold and a Monte Carlo check of the dithered
separate source-channel scheme.
"""

__version__ = "0.1.0"

from .abcmi import AbcmiReport, alpha, beta, check_abcmi, weight_bound
from .distribution import JointPmf, conditional_entropy, entropy, sample, validate
from .imeasure import AtomTable, compute_atoms, conditional_from_atoms, oracle_atoms, weight_extrema
from .rates import (
    ChannelSpec,
    RateTuple,
    assign_rates,
    channel_region_ok,
    check_conditions,
    contribution,
    intersection_feasible,
    kappa_star,
)
from .simulator import SimConfig, SimResult, run_sim

__all__ = [
    "AbcmiReport", "AtomTable", "ChannelSpec", "JointPmf", "RateTuple", "SimConfig", "SimResult",
    "alpha", "assign_rates", "beta", "channel_region_ok", "check_abcmi", "check_conditions",
    "compute_atoms", "conditional_entropy", "conditional_from_atoms", "contribution", "entropy",
    "intersection_feasible", "kappa_star", "oracle_atoms", "run_sim", "sample", "validate",
    "weight_bound", "weight_extrema",
]

"""Halfspace-depth ordinal patterns of planar trajectories."""
from .depth import (
    Disc,
    DomainError,
    Empirical,
    Gaussian,
    analytic_depth,
    empirical_depth,
    oracle_depth,
)
from .movement import WalkParams, simulate_walk
from .patterns import (
    BREAK_BY_INDEX,
    KEEP_TIES,
    PatternDistribution,
    Trajectory,
    enumerate_patterns,
    estimate_pattern_distribution,
    extract_pattern,
)

__version__ = "0.1.0"

__all__ = [
    "BREAK_BY_INDEX",
    "Disc",
    "DomainError",
    "Empirical",
    "Gaussian",
    "KEEP_TIES",
    "PatternDistribution",
    "Trajectory",
    "WalkParams",
    "analytic_depth",
    "empirical_depth",
    "enumerate_patterns",
    "estimate_pattern_distribution",
    "extract_pattern",
    "oracle_depth",
    "simulate_walk",
    "__version__",
]

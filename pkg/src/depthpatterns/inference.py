"""Uncertainty of pattern frequencies and depth-estimation diagnostics."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .depth import DomainError, Gaussian, Reference, analytic_depths, as_points, halfspace_counts
from .patterns import (
    BREAK_BY_INDEX,
    PatternDistribution,
    Trajectory,
    _encode,
    distribution_from_depths,
    trajectory_depths,
    window_taus,
)


@dataclass(frozen=True)
class LrvEstimate:
    sigma2_hat: float
    bandwidth: int
    n: int
    clamped: bool = False


@dataclass(frozen=True)
class SeparationReport:
    n_pairs_tied: int
    min_depth_gap: float
    tolerance: float


def indicator_series(traj: Trajectory, ref: Optional[Reference], pattern, tie_policy: str = BREAK_BY_INDEX) -> np.ndarray:
    """0/1 indicator of ``pattern`` for each of the n - p + 1 windows."""
    p = len(pattern)
    if len(traj) < p:
        raise DomainError(f"trajectory {traj.id!r} is shorter than the pattern order")
    tau, _ = window_taus(trajectory_depths(traj, ref), p, tie_policy)
    return indicators_from_taus(tau, pattern)


def indicators_from_taus(tau: np.ndarray, pattern) -> np.ndarray:
    p = tau.shape[1]
    target = _encode(np.asarray([pattern]), p)[0]
    return (_encode(tau, p) == target).astype(np.int8)


def default_bandwidth(n: int) -> int:
    # floor(n ** (1/3)) with a guard against 1000 ** (1/3) = 9.999...
    b = int(round(n ** (1.0 / 3.0)))
    return b if b ** 3 <= n else b - 1


def lrv_estimate(indicators, bandwidth: Optional[int] = None) -> LrvEstimate:
    """Bartlett-weighted long-run variance of an indicator series.

    sigma2 = g(0) + 2 * sum_{k=1..B} (1 - k/(B+1)) g(k), with g the sample
    autocovariances (divisor n).  Negative totals are clamped to zero.
    """
    y = np.asarray(indicators, dtype=float)
    n = y.shape[0]
    if n < 8:
        raise DomainError("need at least 8 indicators")
    b = default_bandwidth(n) if bandwidth is None else int(bandwidth)
    if not (0 <= b < n):
        raise DomainError("bandwidth must be in [0, n)")
    c = y - y.mean()
    total = float(c @ c) / n
    for k in range(1, b + 1):
        total += 2.0 * (1.0 - k / (b + 1)) * float(c[:-k] @ c[k:]) / n
    clamped = total < 0
    if clamped:
        warnings.warn("negative long-run variance estimate clamped to 0", RuntimeWarning, stacklevel=2)
        total = 0.0
    return LrvEstimate(sigma2_hat=total, bandwidth=b, n=n, clamped=clamped)


def pattern_ci(freq: float, lrv: LrvEstimate, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval freq +- z * sqrt(sigma2 / n), clipped to [0, 1]."""
    if not (0.0 < level < 1.0):
        raise DomainError("level must lie in (0, 1)")
    if not (0.0 <= freq <= 1.0):
        raise DomainError("frequency must lie in [0, 1]")
    half = float(ndtri((1.0 + level) / 2.0)) * math.sqrt(lrv.sigma2_hat / lrv.n)
    return max(0.0, freq - half), min(1.0, freq + half)


def pattern_summary(
    traj: Trajectory,
    ref: Optional[Reference] = None,
    p: int = 3,
    tie_policy: str = BREAK_BY_INDEX,
    level: float = 0.95,
    bandwidth: Optional[int] = None,
) -> tuple[PatternDistribution, list[dict]]:
    """Pattern distribution plus one interval row per alphabet entry."""
    if len(traj) < p:
        raise DomainError(f"trajectory {traj.id!r} has {len(traj)} points, fewer than p={p}")
    values = trajectory_depths(traj, ref)
    dist = distribution_from_depths(values, p, tie_policy)
    tau, _ = window_taus(values, p, tie_policy)
    rows = []
    for pattern, freq in zip(dist.alphabet, dist.freqs):
        ind = indicators_from_taus(tau, pattern)
        if ind.shape[0] >= 8:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                lrv = lrv_estimate(ind, bandwidth)
            lo, hi = pattern_ci(float(freq), lrv, level)
            sigma2, bw = lrv.sigma2_hat, lrv.bandwidth
        else:
            lo = hi = sigma2 = float("nan")
            bw = 0
        rows.append({"pattern": pattern, "freq": float(freq), "count": int(dist.counts[dist.alphabet.index(pattern)]),
                     "ci_low": lo, "ci_high": hi, "sigma2": sigma2, "bandwidth": bw})
    return dist, rows


def check_separation(values, tolerance: float = 0.0) -> SeparationReport:
    """Pairs of depths closer than ``tolerance`` (inclusive) and the smallest gap."""
    d = np.sort(np.asarray(values, dtype=float))
    if d.shape[0] < 2:
        raise DomainError("need at least two depths")
    if not np.isfinite(d).all():
        raise DomainError("depths must be finite")
    if tolerance < 0:
        raise DomainError("tolerance must be nonnegative")
    gap = float(np.diff(d).min())
    hi = np.searchsorted(d, d + tolerance, side="right")
    tied = int((hi - np.arange(d.shape[0]) - 1).sum())
    return SeparationReport(n_pairs_tied=tied, min_depth_gap=gap, tolerance=float(tolerance))


def replication_rngs(seed, reps: int) -> list[np.random.Generator]:
    """Independent generators, one per replication, fixed by the base seed alone."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in ss.spawn(reps)]


def depth_convergence_curve(
    ref: Reference,
    sampler: Callable[[int, np.random.Generator], np.ndarray],
    grid,
    sizes: Sequence[int],
    reps: int,
    seed=0,
) -> list[tuple[int, float]]:
    """Median over replications of the grid-wide max |empirical - analytic| depth."""
    pts = as_points(grid)
    sizes = [int(s) for s in sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DomainError("sample sizes must be increasing")
    if reps < 1:
        raise DomainError("need at least one replication")
    target = analytic_depths(pts, ref)
    ss = np.random.SeedSequence(seed)
    out = []
    for n, child in zip(sizes, ss.spawn(len(sizes))):
        errors = []
        for rng in replication_rngs(child, reps):
            sample = sampler(n, rng)
            emp = halfspace_counts(pts, sample) / n
            errors.append(float(np.abs(emp - target).max()))
        out.append((n, float(np.median(errors))))
    return out


def disc_grid(k: int = 5, radius: float = 0.8) -> np.ndarray:
    """k x k lattice of points inside the disc of the given radius."""
    side = radius / math.sqrt(2.0)
    g = np.linspace(-side, side, k)
    return np.array([(a, b) for a in g for b in g])


def exchangeable_statistics(n: int, reps: int, pattern=(1, 2, 3), seed=0) -> np.ndarray:
    """sqrt(N) (p_hat - p) / sigma_hat over replications of an i.i.d. Gaussian path.

    Depths against the generating Gaussian are i.i.d. and continuous, so every
    tie-free pattern of order p has probability exactly 1/p!.
    """
    ref = Gaussian((0.0, 0.0), ((1.0, 0.0), (0.0, 1.0)))
    p = len(pattern)
    truth = 1.0 / math.factorial(p)
    stats = []
    for rng in replication_rngs(seed, reps):
        pts = rng.standard_normal((n, 2))
        tau, _ = window_taus(analytic_depths(pts, ref), p, BREAK_BY_INDEX)
        ind = indicators_from_taus(tau, pattern)
        lrv = lrv_estimate(ind)
        stats.append(math.sqrt(lrv.n) * (ind.mean() - truth) / math.sqrt(lrv.sigma2_hat))
    return np.array(stats)


def exchangeable_coverage(n: int, reps: int, p: int = 3, width: float = 3.0, seed=0) -> np.ndarray:
    """Per replication: are all tie-free frequencies within width * sqrt(sigma2/N) of 1/p!?"""
    ref = Gaussian((0.0, 0.0), ((1.0, 0.0), (0.0, 1.0)))
    truth = 1.0 / math.factorial(p)
    ok = []
    for rng in replication_rngs(seed, reps):
        traj = Trajectory("iid", rng.standard_normal((n, 2)))
        _, rows = pattern_summary(traj, ref, p, BREAK_BY_INDEX)
        ok.append(all(abs(row["freq"] - truth) <= width * math.sqrt(row["sigma2"] / (n - p + 1)) for row in rows))
    return np.array(ok)


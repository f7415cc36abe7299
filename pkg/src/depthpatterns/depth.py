"""Tukey halfspace depth in the plane.

Empirical depths are computed exactly: the minimum closed-halfplane count is
found by an angular sweep whose boundary decisions use exact orientation
signs, so collinear and duplicated points are handled deterministically.
Analytic references (the unit-disc law with depth ``(1 - |x|) / 2`` and
bivariate Gaussians) have closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels

# rows of the angle matrix processed at once; bounds memory at ~64 MB
_CHUNK_CELLS = 8_000_000


class DomainError(ValueError):
    """Raised when an input lies outside an operation's domain."""


@dataclass(frozen=True)
class Empirical:
    """Empirical measure putting mass 1/m on each of m points (order kept)."""

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))


@dataclass(frozen=True)
class Disc:
    """Rotation-invariant law on the open unit disc with uniform marginals."""


@dataclass(frozen=True)
class Gaussian:
    mean: tuple[float, float]
    cov: tuple[tuple[float, float], tuple[float, float]]

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if mean.shape != (2,) or cov.shape != (2, 2):
            raise DomainError("Gaussian reference needs a 2-vector mean and 2x2 covariance")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise DomainError("Gaussian parameters must be finite")
        if cov[0, 1] != cov[1, 0]:
            raise DomainError("covariance must be symmetric")
        if not (cov[0, 0] > 0 and cov[1, 1] > 0 and np.linalg.det(cov) > 0):
            raise DomainError("covariance must be positive definite")
        object.__setattr__(self, "mean", tuple(float(v) for v in mean))
        object.__setattr__(self, "cov", tuple(tuple(float(v) for v in row) for row in cov))


Reference = Union[Empirical, Disc, Gaussian]


def as_points(points) -> np.ndarray:
    """Validate and convert to a float array of shape (m, 2), m >= 1."""
    if isinstance(points, Empirical):
        return points.points
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1 and arr.shape == (2,):
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"expected points of shape (m, 2), got {arr.shape}")
    if arr.shape[0] == 0:
        raise DomainError("point set is empty")
    if not np.isfinite(arr).all():
        raise DomainError("coordinates must be finite")
    return np.ascontiguousarray(arr)


def _as_point(x) -> np.ndarray:
    arr = as_points(x)
    if arr.shape[0] != 1:
        raise DomainError("expected a single point")
    return arr[0]


def halfspace_counts(queries, ref) -> np.ndarray:
    """Minimum number of reference points in a closed halfplane through each query.

    This is ``m * depth`` as an exact integer.
    """
    q = as_points(queries)
    r = as_points(ref)
    rx, ry = r[:, 0].copy(), r[:, 1].copy()
    out = np.empty(q.shape[0], dtype=np.int64)
    step = max(1, _CHUNK_CELLS // r.shape[0])
    for start in range(0, q.shape[0], step):
        qx = q[start:start + step, 0].copy()
        qy = q[start:start + step, 1].copy()
        angles, coincident = _kernels.angle_rows(qx, qy, rx, ry)
        angles.sort(axis=1)
        counts = _kernels.sweep_rows(angles, coincident)
        near = np.flatnonzero(counts < 0)
        if near.size:
            counts[near] = _kernels.depth_counts(qx[near], qy[near], rx, ry)
        out[start:start + step] = counts
    return out


def empirical_depth(x, ref) -> float:
    """Halfspace depth of ``x`` with respect to the empirical measure of ``ref``."""
    p = _as_point(x)
    r = as_points(ref)
    count = _kernels.depth_counts(p[:1].copy(), p[1:].copy(), r[:, 0].copy(), r[:, 1].copy())[0]
    return int(count) / r.shape[0]


def empirical_depths(queries, ref) -> np.ndarray:
    r = as_points(ref)
    return halfspace_counts(queries, r) / r.shape[0]


def oracle_depth(x, ref) -> float:
    """Brute-force depth used to check the sweep.

    The closed-halfplane count is piecewise constant in the normal direction,
    changing only where the normal is perpendicular to some ``y_j - x``.  Its
    minimum is therefore attained strictly between consecutive breakpoints;
    every such arc is probed at its midpoint, together with the breakpoints
    themselves, the directions ``-(y_j - x)`` and one fixed direction.
    """
    p = _as_point(x)
    r = as_points(ref)
    m = r.shape[0]
    v = r - p
    nonzero = ~((v[:, 0] == 0) & (v[:, 1] == 0))
    w = v[nonzero]
    if w.shape[0] == 0:
        return 1.0
    theta = np.arctan2(w[:, 1], w[:, 0])
    breaks = np.mod(np.concatenate([theta + np.pi / 2, theta - np.pi / 2]), 2 * np.pi)
    breaks = np.unique(breaks)
    # collapse breakpoints that differ only by rounding
    keep = np.concatenate([[True], np.diff(breaks) > 1e-9])
    breaks = breaks[keep]
    nxt = np.concatenate([breaks[1:], [breaks[0] + 2 * np.pi]])
    mids = (breaks + nxt) / 2
    candidates = np.concatenate([mids, breaks, np.mod(theta + np.pi, 2 * np.pi), [0.0]])
    normals = np.stack([np.cos(candidates), np.sin(candidates)], axis=1)
    dots = v @ normals.T
    # exact zeros for coincident points; everything else is decided by sign
    counts = (dots >= 0).sum(axis=0)
    perp = np.stack([-w[:, 1], w[:, 0]], axis=1)
    exact = np.concatenate([perp, -perp, -w])
    exact_counts = ((v @ exact.T) >= 0).sum(axis=0)
    best = min(int(counts.min()), int(exact_counts.min()))
    return best / m


def _std_normal_lower(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def analytic_depth(x, ref: Reference) -> float:
    p = _as_point(x)
    if isinstance(ref, Disc):
        norm = math.hypot(p[0], p[1])
        return 0.5 * (1.0 - norm) if norm < 1.0 else 0.0
    if isinstance(ref, Gaussian):
        d = p - np.asarray(ref.mean)
        maha = float(d @ np.linalg.solve(np.asarray(ref.cov), d))
        return _std_normal_lower(-math.sqrt(max(maha, 0.0)))
    if isinstance(ref, Empirical):
        raise DomainError("empirical references need empirical_depth")
    raise DomainError(f"unknown reference {ref!r}")


def analytic_depths(points, ref: Reference) -> np.ndarray:
    pts = as_points(points)
    if isinstance(ref, Disc):
        norm = np.hypot(pts[:, 0], pts[:, 1])
        return np.where(norm < 1.0, 0.5 * (1.0 - norm), 0.0)
    if isinstance(ref, Gaussian):
        d = pts - np.asarray(ref.mean)
        maha = np.einsum("ij,ij->i", d @ np.linalg.inv(np.asarray(ref.cov)), d)
        from scipy.special import ndtr

        return ndtr(-np.sqrt(np.maximum(maha, 0.0)))
    return np.array([analytic_depth(p, ref) for p in pts])


def depths(points, ref: Reference) -> np.ndarray:
    """Depth of every point against ``ref``, dispatching on the reference kind."""
    if isinstance(ref, Empirical):
        return empirical_depths(points, ref.points)
    return analytic_depths(points, ref)


def sample_disc(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw from the disc law with density 1 / (2 pi sqrt(1 - |v|^2)).

    The radius has CDF 1 - sqrt(1 - r^2), inverted as sqrt(2u - u^2).
    """
    if n < 1:
        raise DomainError("need at least one sample")
    u = rng.random(n)
    angle = rng.random(n) * 2 * np.pi
    radius = np.sqrt(2 * u - u * u)
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)


def sample_gaussian(n: int, ref: Gaussian, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise DomainError("need at least one sample")
    return rng.multivariate_normal(np.asarray(ref.mean), np.asarray(ref.cov), size=n)

"""Depth patterns of sliding windows and their relative frequencies."""
from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .depth import DomainError, Empirical, Reference, as_points, depths, halfspace_counts

KEEP_TIES = "keep_ties"
BREAK_BY_INDEX = "break_by_index"
TIE_POLICIES = (KEEP_TIES, BREAK_BY_INDEX)

MAX_ORDER = 8

Pattern = tuple  # tau vector, entries in 1..p


@dataclass
class Trajectory:
    id: str
    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = as_points(self.points)
        self.id = str(self.id)

    def __len__(self):
        return self.points.shape[0]

    def reversed(self) -> "Trajectory":
        return Trajectory(self.id, self.points[::-1].copy())


@dataclass
class PatternDistribution:
    """Relative frequencies over an ordered pattern alphabet.

    ``counts`` is present for a single trajectory; Monte-Carlo averages carry
    only ``freqs``.
    """

    order: int
    alphabet: list
    freqs: np.ndarray
    n_windows: int
    n_tied_windows: int
    counts: Optional[np.ndarray] = None
    tie_policy: str = BREAK_BY_INDEX

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        if len(self.alphabet) != self.freqs.shape[0]:
            raise DomainError("alphabet and frequency vector differ in length")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise DomainError("alphabet entries must be distinct")
        if self.n_tied_windows > self.n_windows:
            raise DomainError("more tied windows than windows")

    def frequency(self, pattern) -> float:
        return float(self.freqs[self.alphabet.index(tuple(pattern))])

    def labels(self) -> list:
        return [pattern_to_label(p) for p in self.alphabet]

    def as_dict(self) -> dict:
        return {pattern_to_label(p): float(f) for p, f in zip(self.alphabet, self.freqs)}


def is_cayley(tau: Sequence[int]) -> bool:
    """True iff every value v present in tau has exactly v entries <= v."""
    p = len(tau)
    if any(not (1 <= t <= p) for t in tau):
        return False
    arr = np.asarray(tau)
    return all(int((arr <= v).sum()) == v for v in set(tau))


def extract_pattern(values: Sequence[float]) -> Pattern:
    """tau(i) = number of j with values[j] >= values[i]; ties share an entry."""
    d = np.asarray(values, dtype=float)
    if d.ndim != 1 or d.shape[0] < 2:
        raise DomainError("a pattern needs at least two depths")
    if not np.isfinite(d).all():
        raise DomainError("depths must be finite")
    return tuple(int(c) for c in (d[None, :] >= d[:, None]).sum(axis=1))


def enumerate_patterns(p: int, ties_allowed: bool) -> list:
    """All patterns of order p in lexicographic order of tau."""
    if not (2 <= p <= MAX_ORDER):
        raise DomainError(f"pattern order must be in [2, {MAX_ORDER}]")
    return list(_alphabet(p, bool(ties_allowed)))


@functools.lru_cache(maxsize=None)
def _alphabet(p: int, ties_allowed: bool) -> tuple:
    if not ties_allowed:
        return tuple(sorted(itertools.permutations(range(1, p + 1))))
    out = []
    _cayley(tuple(range(p)), 0, [0] * p, out)
    return tuple(sorted(out))


def _cayley(remaining, placed, tau, out):
    # pick the next-deepest block of tied items; they all get rank placed + |block|
    if not remaining:
        out.append(tuple(tau))
        return
    for size in range(1, len(remaining) + 1):
        for block in itertools.combinations(remaining, size):
            for i in block:
                tau[i] = placed + size
            rest = tuple(i for i in remaining if i not in block)
            _cayley(rest, placed + size, tau, out)


def pattern_to_label(pattern: Sequence[int]) -> str:
    return "(" + ", ".join(str(int(t) - 1) for t in pattern) + ")"


_LABEL = re.compile(r"^\(\s*\d+(\s*,\s*\d+)*\s*\)$")


def label_to_pattern(label: str, p: Optional[int] = None) -> Pattern:
    s = label.strip()
    if not _LABEL.match(s):
        raise ValueError(f"malformed pattern label {label!r}")
    tau = tuple(int(tok) + 1 for tok in s[1:-1].split(","))
    if p is not None and len(tau) != p:
        raise ValueError(f"label {label!r} does not have order {p}")
    if not is_cayley(tau):
        raise ValueError(f"label {label!r} is not a valid depth pattern")
    return tau


def window_taus(values: np.ndarray, p: int, tie_policy: str) -> tuple[np.ndarray, np.ndarray]:
    """Patterns of all length-p windows of a depth sequence.

    Returns the (n - p + 1, p) tau matrix and a mask of windows containing a
    tie.  Under ``break_by_index`` tied depths are ranked by position, the
    earlier one deeper.
    """
    if tie_policy not in TIE_POLICIES:
        raise DomainError(f"unknown tie policy {tie_policy!r}")
    if not (2 <= p <= MAX_ORDER):
        raise DomainError(f"pattern order must be in [2, {MAX_ORDER}]")
    values = np.asarray(values)
    if values.shape[0] < p:
        raise DomainError(f"need at least {p} points, got {values.shape[0]}")
    w = np.lib.stride_tricks.sliding_window_view(values, p)
    geq = w[:, None, :] >= w[:, :, None]  # [k, i, j]: d_j >= d_i
    eq = w[:, None, :] == w[:, :, None]
    n_eq = eq.sum(axis=(1, 2))
    tied = n_eq > p
    if tie_policy == KEEP_TIES:
        tau = geq.sum(axis=2)
    else:
        gt = w[:, None, :] > w[:, :, None]
        earlier = np.tril(np.ones((p, p), dtype=bool), k=-1)  # j < i
        tau = 1 + gt.sum(axis=2) + (eq & earlier[None]).sum(axis=2)
    return tau.astype(np.int64), tied


def _encode(tau: np.ndarray, p: int) -> np.ndarray:
    weights = (p + 1) ** np.arange(p - 1, -1, -1)
    return tau @ weights


@functools.lru_cache(maxsize=None)
def _alphabet_index(p: int, ties_allowed: bool) -> dict:
    codes = _encode(np.array(_alphabet(p, ties_allowed)), p)
    return {int(c): k for k, c in enumerate(codes)}


def trajectory_depths(traj: Trajectory, ref: Optional[Reference]) -> np.ndarray:
    """Depth of every trajectory point; ``ref=None`` means self-reference.

    Empirical references return exact integer halfspace counts scaled by
    1/m, so equal depths compare equal.
    """
    if ref is None:
        ref = Empirical(traj.points)
    if isinstance(ref, Empirical):
        return halfspace_counts(traj.points, ref.points) / ref.points.shape[0]
    return depths(traj.points, ref)


def distribution_from_depths(values, p: int, tie_policy: str = BREAK_BY_INDEX) -> PatternDistribution:
    tau, tied = window_taus(values, p, tie_policy)
    alphabet = enumerate_patterns(p, ties_allowed=tie_policy == KEEP_TIES)
    codes = _encode(tau, p)
    index = _alphabet_index(p, tie_policy == KEEP_TIES)
    counts = np.zeros(len(alphabet), dtype=np.int64)
    uniq, cnt = np.unique(codes, return_counts=True)
    for c, k in zip(uniq, cnt):
        counts[index[int(c)]] += k
    n = tau.shape[0]
    return PatternDistribution(
        order=p,
        alphabet=alphabet,
        freqs=counts / n,
        n_windows=n,
        n_tied_windows=int(tied.sum()),
        counts=counts,
        tie_policy=tie_policy,
    )


def estimate_pattern_distribution(
    traj: Trajectory,
    ref: Optional[Reference] = None,
    p: int = 3,
    tie_policy: str = BREAK_BY_INDEX,
) -> PatternDistribution:
    """Relative frequency of each depth pattern over the n - p + 1 windows.

    With ``ref=None`` each point's depth is taken against the empirical
    distribution of the whole trajectory.
    """
    if len(traj) < p:
        raise DomainError(f"trajectory {traj.id!r} has {len(traj)} points, fewer than p={p}")
    return distribution_from_depths(trajectory_depths(traj, ref), p, tie_policy)

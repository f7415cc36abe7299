"""Monte-Carlo pattern distributions of walk models and their fit to animal data."""
from __future__ import annotations

import csv
import io
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Optional, Sequence

import numpy as np

from .depth import DomainError
from .inference import replication_rngs
from .movement import WalkParams, simulate_walk
from .patterns import BREAK_BY_INDEX, PatternDistribution, enumerate_patterns, estimate_pattern_distribution

# tie-free order-3 patterns in the column order of the bundled animal table
ANIMAL_COLUMNS = [(1, 2, 3), (1, 3, 2), (3, 1, 2), (3, 2, 1), (2, 3, 1), (2, 1, 3)]
ANIMAL_HEADER = ["id", "p012", "p021", "p201", "p210", "p120", "p102"]
SUM_TOLERANCE = 5e-4

DEFAULT_KAPPAS = (0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_BETAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class AnimalFrequencies:
    id: str
    freqs: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.freqs)
        if len(v) != 6:
            raise DomainError(f"{self.id}: expected 6 frequencies")
        if any(not (0.0 <= x <= 1.0) for x in v):
            raise DomainError(f"{self.id}: frequency outside [0, 1]")
        if abs(math.fsum(v) - 1.0) > SUM_TOLERANCE:
            raise DomainError(f"{self.id}: frequencies sum to {math.fsum(v):.6f}")
        object.__setattr__(self, "freqs", v)


@dataclass(frozen=True)
class GridSpec:
    r_values: tuple = (1, -1)
    kappa_values: tuple = DEFAULT_KAPPAS
    beta_values: tuple = DEFAULT_BETAS
    reps: int = 1000
    steps: int = 1000
    lam: float = 0.02
    p: int = 3
    seed: int = 0

    def __post_init__(self):
        if not (self.r_values and self.kappa_values and self.beta_values):
            raise DomainError("grid value lists must be nonempty")
        if any(r not in (-1, 1) for r in self.r_values):
            raise DomainError("r values must be -1 or +1")
        if any(k < 0 for k in self.kappa_values):
            raise DomainError("kappa values must be nonnegative")
        if any(not (0 <= b <= 1) for b in self.beta_values):
            raise DomainError("beta values must lie in [0, 1]")
        if self.reps < 1 or self.steps < 1:
            raise DomainError("reps and steps must be positive")
        if self.lam <= 0:
            raise DomainError("lambda must be positive")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")

    def cells(self):
        for r in self.r_values:
            for kappa in self.kappa_values:
                for beta in self.beta_values:
                    yield int(r), float(kappa), float(beta)

    def to_json_dict(self) -> dict:
        return {"r_values": list(self.r_values), "kappa_values": list(self.kappa_values),
                "beta_values": list(self.beta_values), "reps": self.reps, "steps": self.steps,
                "lambda": self.lam, "p": self.p, "seed": self.seed}

    @classmethod
    def from_json_dict(cls, d: dict) -> "GridSpec":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        for key in ("r_values", "kappa_values", "beta_values"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass
class MCResult:
    distribution: PatternDistribution
    stderr: np.ndarray
    per_rep: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ScanRow:
    r: int
    kappa: float
    beta: float
    objective: float
    stderr: float
    freqs: tuple


def _fsum_columns(m: np.ndarray) -> np.ndarray:
    # exact-rounded sums make the mean independent of accumulation order
    return np.array([math.fsum(col) for col in m.T])


def mc_pattern_distribution(
    template: WalkParams,
    reps: int,
    steps: int,
    p: int = 3,
    seed=0,
    tie_policy: str = BREAK_BY_INDEX,
) -> MCResult:
    """Average self-referenced pattern frequencies over ``reps`` simulated walks.

    Replication i uses the i-th generator of ``replication_rngs(seed, reps)``.
    """
    if reps < 1 or steps < 1:
        raise DomainError("reps and steps must be positive")
    params = template.replace(n_steps=steps)
    rows = []
    n_windows = n_tied = 0
    for i, rng in enumerate(replication_rngs(seed, reps)):
        traj = simulate_walk(params, rng, id=f"walk{i:04d}")
        dist = estimate_pattern_distribution(traj, None, p, tie_policy)
        rows.append(dist.freqs)
        n_windows += dist.n_windows
        n_tied += dist.n_tied_windows
    per_rep = np.array(rows)
    mean = _fsum_columns(per_rep) / reps
    if reps > 1:
        dev = per_rep - mean
        stderr = np.sqrt(_fsum_columns(dev * dev) / (reps - 1) / reps)
    else:
        stderr = np.zeros_like(mean)
    avg = PatternDistribution(
        order=p,
        alphabet=enumerate_patterns(p, ties_allowed=tie_policy != BREAK_BY_INDEX),
        freqs=mean,
        n_windows=n_windows,
        n_tied_windows=n_tied,
        tie_policy=tie_policy,
    )
    return MCResult(avg, stderr, per_rep)


def animal_vector(dist: PatternDistribution) -> np.ndarray:
    """Frequencies of an order-3 distribution in the animal-table column order."""
    if dist.order != 3:
        raise DomainError("animal columns exist only for order 3")
    return np.array([dist.frequency(p) for p in ANIMAL_COLUMNS])


def distance_objective(animals: Sequence[AnimalFrequencies], q) -> float:
    """Sum over animals of the Euclidean distance between their frequencies and q."""
    q = np.asarray(q, dtype=float)
    if q.shape != (6,):
        raise DomainError("q must be a 6-vector in animal column order")
    if not animals:
        raise DomainError("no animals given")
    return math.fsum(float(np.linalg.norm(np.asarray(a.freqs) - q)) for a in animals)


def objective_stderr(animals: Sequence[AnimalFrequencies], per_rep: np.ndarray) -> float:
    """Delta-method Monte-Carlo standard error of the objective at the mean vector."""
    reps = per_rep.shape[0]
    if reps < 2:
        return 0.0
    q = per_rep.mean(axis=0)
    grad = np.zeros(6)
    for a in animals:
        d = q - np.asarray(a.freqs)
        norm = np.linalg.norm(d)
        if norm > 0:
            grad += d / norm
    cov = np.cov(per_rep, rowvar=False) / reps
    return float(math.sqrt(max(grad @ cov @ grad, 0.0)))


def cell_seed(seed: int, r: int, kappa: float, beta: float) -> np.random.SeedSequence:
    """Seed of one grid cell, derived from the grid seed and the cell's values only."""
    bits = [struct.unpack("<Q", struct.pack("<d", float(v)))[0] for v in (kappa, beta)]
    return np.random.SeedSequence(seed, spawn_key=(r + 1, *bits))


def _animal_columns_vector(mc: MCResult) -> tuple[np.ndarray, np.ndarray]:
    alphabet = mc.distribution.alphabet
    idx = [alphabet.index(p) for p in ANIMAL_COLUMNS]
    return mc.distribution.freqs[idx], mc.per_rep[:, idx]


def scan_cell(grid: GridSpec, animals, r: int, kappa: float, beta: float) -> ScanRow:
    template = WalkParams(lam=grid.lam, r=r, beta=beta, kappa=kappa, n_steps=grid.steps)
    mc = mc_pattern_distribution(template, grid.reps, grid.steps, grid.p, cell_seed(grid.seed, r, kappa, beta))
    q, per_rep = _animal_columns_vector(mc)
    return ScanRow(r, kappa, beta, distance_objective(animals, q), objective_stderr(animals, per_rep), tuple(q))


def grid_scan(
    grid: GridSpec,
    animals: Sequence[AnimalFrequencies],
    workers: int = 1,
    progress: Optional[Callable[[ScanRow], None]] = None,
) -> list[ScanRow]:
    """Objective for every (r, kappa, beta) cell; independent of ``workers``."""
    if grid.p != 3:
        raise DomainError("the animal objective is defined for order-3 patterns")
    cells = list(grid.cells())

    def run(cell):
        row = scan_cell(grid, animals, *cell)
        if progress is not None:
            progress(row)
        return row

    if workers <= 1:
        return [run(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, cells))


def pivot(rows: Sequence[ScanRow]) -> list[dict]:
    """One row per (r, kappa) with the objective for each beta: kappa rows by beta columns."""
    betas = sorted({row.beta for row in rows})
    table = {}
    for row in rows:
        table.setdefault((row.r, row.kappa), {})[row.beta] = row.objective
    out = []
    for (r, kappa), vals in sorted(table.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
        out.append({"r": r, "kappa": kappa, **{f"beta={b:g}": vals.get(b, float("nan")) for b in betas}})
    return out


def scan_summary(rows: Sequence[ScanRow]) -> dict:
    best = min(rows, key=lambda row: row.objective)
    by_r = {}
    for row in rows:
        by_r.setdefault(row.r, []).append(row.objective)
    return {
        "argmin": {"r": best.r, "kappa": best.kappa, "beta": best.beta,
                   "objective": best.objective, "stderr": best.stderr},
        "mean_objective_by_r": {str(r): math.fsum(v) / len(v) for r, v in sorted(by_r.items())},
        "n_cells": len(rows),
    }


def parse_animal_frequencies(text: str, source: str = "<string>") -> list[AnimalFrequencies]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ANIMAL_HEADER:
        raise ParseError(f"{source}: expected header {','.join(ANIMAL_HEADER)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != 7:
            raise ParseError(f"{source}: row {lineno} has {len(row)} fields, expected 7")
        try:
            out.append(AnimalFrequencies(row[0].strip(), tuple(float(v) for v in row[1:])))
        except ValueError as exc:
            raise ParseError(f"{source}: row {lineno} ({row[0]}): {exc}") from None
    if not out:
        raise ParseError(f"{source}: no animal rows")
    return out


def load_animal_frequencies(path=None) -> list[AnimalFrequencies]:
    """Read per-animal frequencies; without a path, the bundled seal-pup table."""
    if path is None:
        text = resources.files("depthpatterns").joinpath("data/seal_pups_fwb.csv").read_text()
        return parse_animal_frequencies(text, "seal_pups_fwb.csv")
    with open(path) as fh:
        return parse_animal_frequencies(fh.read(), str(path))

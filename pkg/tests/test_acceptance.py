"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are repeated
in the terminal summary.  Criteria known not to hold for this implementation
are marked xfail with the reason; their lines still say FAIL.
"""
import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import special, stats

from conftest import QUERIES, REF3, REF6, REF7
from depthpatterns.cli import DEFAULT_SEED
from depthpatterns.depth import Disc, Empirical, empirical_depth, oracle_depth, sample_disc
from depthpatterns.inference import (
    depth_convergence_curve,
    disc_grid,
    exchangeable_coverage,
    exchangeable_statistics,
)
from depthpatterns.modelsel import (
    GridSpec,
    animal_vector,
    grid_scan,
    load_animal_frequencies,
    mc_pattern_distribution,
)
from depthpatterns.movement import WalkParams, sample_step_length, sample_von_mises
from depthpatterns.patterns import enumerate_patterns, extract_pattern

REPORT = []


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT.append(line)
    print(line)
    return ok


def exact(depth, m):
    f = Fraction(depth).limit_denominator(m)
    assert float(f) == depth
    return f


@pytest.mark.xfail(strict=True, reason="third query against seven points recounts to 1/7; see notes")
def test_criterion_1_figure_depths():
    expected = {3: (Fraction(1, 3), 0, 0), 6: (Fraction(1, 6), 0, Fraction(1, 6)), 7: (Fraction(1, 7), 0, Fraction(2, 7))}
    got = {len(ref): tuple(exact(empirical_depth(q, Empirical(ref)), len(ref)) for q in QUERIES)
           for ref in (REF3, REF6, REF7)}
    bad = [(m, i, str(got[m][i]), str(expected[m][i])) for m in expected for i in range(3) if got[m][i] != expected[m][i]]
    report(1, not bad, f"mismatches (m, query, got, expected): {bad}")
    assert not bad


def test_criterion_2_oracle_equivalence():
    rng = np.random.default_rng(DEFAULT_SEED)
    cases = []
    for _ in range(200):
        ref = rng.normal(size=(15, 2))
        cases.append((rng.normal(size=2), ref))
    line = [(float(k), 2.0 * k) for k in range(-3, 4)]
    cases += [
        ((0.5, 1.0), line),                       # collinear, query on the line
        ((1.0, 2.0), line),                       # collinear, query on a point
        ((0.0, 5.0), line),                       # collinear, query off the line
        ((1.0, 1.0), [(1.0, 1.0)] * 5 + [(0.0, 0.0)]),   # duplicates coinciding with the query
        ((0.0, 0.0), [(1.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.0, -1.0)]),
        (tuple(REF7[3]), REF7),                   # query equals a reference point
    ]
    t0 = time.perf_counter()
    mismatches = sum(empirical_depth(q, Empirical(r)) != oracle_depth(q, Empirical(r)) for q, r in cases)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 5
    report(2, ok, f"{len(cases)} instances, {mismatches} mismatches, {elapsed:.2f} s")
    assert ok


SIMPLE_WALK_TARGET = np.array([0.2482, 0.126, 0.126, 0.249, 0.126, 0.126])


def test_criterion_3_simple_walk_frequencies():
    mc = mc_pattern_distribution(WalkParams(kappa=0.0, lam=0.02), reps=500, steps=1000, seed=DEFAULT_SEED)
    q = animal_vector(mc.distribution)
    dev = np.abs(q - SIMPLE_WALK_TARGET).max()
    report(3, dev <= 0.015, f"frequencies {np.round(q, 4).tolist()}, max deviation {dev:.4f} (tol 0.015)")
    assert dev <= 0.015


@pytest.fixture(scope="module")
def model_grid():
    grid = GridSpec(reps=300, steps=1000, lam=0.02, seed=DEFAULT_SEED)
    rows = grid_scan(grid, load_animal_frequencies())
    return {(r.r, r.kappa, r.beta): r for r in rows}


@pytest.mark.xfail(strict=False, reason="simulated objective at this cell sits above the target value; see notes")
def test_criterion_4a_antipersistent_cell(model_grid):
    cell = model_grid[(-1, 1.0, 0.0)]
    ok = abs(cell.objective - 0.409) <= 0.10
    report("4a", ok, f"(r=-1, kappa=1, beta=0) objective {cell.objective:.4f} +- {cell.stderr:.4f}, target 0.409 +- 0.10")
    assert ok


@pytest.mark.xfail(strict=False, reason="simulated objective at this cell sits above the target value; see notes")
def test_criterion_4b_persistent_cell(model_grid):
    cell = model_grid[(1, 4.0, 0.2)]
    ok = abs(cell.objective - 5.526) <= 0.15
    report("4b", ok, f"(r=+1, kappa=4, beta=0.2) objective {cell.objective:.4f} +- {cell.stderr:.4f}, target 5.526 +- 0.15")
    assert ok


def test_criterion_4c_persistent_rows_worse(model_grid):
    mean = {r: math.fsum(c.objective for k, c in model_grid.items() if k[0] == r) / 30 for r in (1, -1)}
    ok = mean[1] > mean[-1]
    report("4c", ok, f"mean objective r=+1 {mean[1]:.4f} vs r=-1 {mean[-1]:.4f}")
    assert ok


@pytest.mark.xfail(strict=False, reason="column minimum falls at a smaller kappa; see notes")
def test_criterion_4d_column_minimum(model_grid):
    column = {k[1]: c.objective for k, c in model_grid.items() if k[0] == -1 and k[2] == 0.0}
    best = min(column, key=column.get)
    ok = best == 1.0
    report("4d", ok, f"r=-1, beta=0 column {({k: round(v, 4) for k, v in sorted(column.items())})}, argmin kappa={best:g}")
    assert ok


def test_criterion_5_alphabet_sizes():
    brute3 = {extract_pattern(v) for v in itertools.product(range(1, 4), repeat=3)}
    brute4 = {p for p in (extract_pattern(v) for v in itertools.product(range(1, 5), repeat=4)) if sorted(p) == [1, 2, 3, 4]}
    sizes = (len(enumerate_patterns(3, False)), len(enumerate_patterns(3, True)), len(enumerate_patterns(4, False)))
    ok = sizes == (6, 13, 24) and set(enumerate_patterns(3, True)) == brute3 and set(enumerate_patterns(4, False)) == brute4
    report(5, ok, f"sizes {sizes}, brute force {len(brute3)} and {len(brute4)}")
    assert ok


def test_criterion_6_exchangeable_coverage():
    hits = exchangeable_coverage(20_000, 100, p=3, width=3.0, seed=DEFAULT_SEED)
    ok = hits.mean() >= 0.95
    report(6, ok, f"{int(hits.sum())}/100 runs with all six frequencies inside 3 sigma of 1/6")
    assert ok


def test_criterion_7_clt_shape():
    z = exchangeable_statistics(5000, 500, seed=DEFAULT_SEED)
    pvalue = stats.kstest(z, "norm").pvalue
    ok = pvalue > 0.01
    report(7, ok, f"KS p-value {pvalue:.4f} over 500 replications (mean {z.mean():.3f}, sd {z.std():.3f})")
    assert ok


def test_criterion_8_depth_convergence():
    curve = depth_convergence_curve(Disc(), sample_disc, disc_grid(5), [100, 1000, 10_000], reps=25, seed=DEFAULT_SEED)
    errs = [e for _, e in curve]
    ok = errs[0] > errs[1] > errs[2] and errs[2] <= 0.02
    report(8, ok, f"median sup-errors {[round(e, 4) for e in errs]}")
    assert ok


def test_criterion_9_sampler_moments():
    rng = np.random.default_rng(DEFAULT_SEED)
    lam = 0.02
    mean = sample_step_length(lam, rng, size=100_000).mean()
    ok_exp = abs(mean * lam - 1) <= 0.02
    gaps = {}
    for kappa in (0.25, 1.0, 4.0):
        a = np.array([sample_von_mises(0.7, kappa, rng) for _ in range(100_000)])
        rbar = math.hypot(np.cos(a).mean(), np.sin(a).mean())
        gaps[kappa] = abs(rbar - float(special.i1(kappa) / special.i0(kappa)))
    ok = ok_exp and max(gaps.values()) <= 0.02
    report(9, ok, f"exponential mean {mean:.3f} (1/lambda = 50); resultant-length gaps {({k: round(v, 4) for k, v in gaps.items()})}")
    assert ok

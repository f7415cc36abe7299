import functools
from fractions import Fraction

import pytest

# figure fixtures: reference sets grow 3 -> 6 -> 7 points
REF3 = [(3, 3), (-1, 1), (1, -2)]
REF6 = REF3 + [(-1, -2), (-2, -3), (-1, -4)]
REF7 = REF6 + [(2, -3)]
QUERIES = [(2, 2), (-2.1, -1), (-1, -3.15)]


def _angle_key(v):
    # exact angular order of integer vectors: half-plane first, then cross product
    x, y = v
    return 0 if (y > 0 or (y == 0 and x > 0)) else 1


def _cmp(a, b):
    ha, hb = _angle_key(a), _angle_key(b)
    if ha != hb:
        return ha - hb
    c = a[0] * b[1] - a[1] * b[0]
    return -1 if c > 0 else (1 if c < 0 else 0)


def brute_depth_count(x, ref):
    """Closed-halfplane minimum count by exhaustive search over arcs (integer inputs only)."""
    vs = [(px - x[0], py - x[1]) for px, py in ref]
    crit = set()
    for vx, vy in vs:
        if (vx, vy) != (0, 0):
            crit.add((-vy, vx))
            crit.add((vy, -vx))
    dirs = sorted(crit, key=functools.cmp_to_key(_cmp))
    cands = [(1, 0)]
    for i, a in enumerate(dirs):
        b = dirs[(i + 1) % len(dirs)]
        cross = a[0] * b[1] - a[1] * b[0]
        if len(dirs) == 1:
            cands.append((-a[1], a[0]))
        elif cross > 0:
            cands.append((a[0] + b[0], a[1] + b[1]))
        else:
            # gap of at least pi: the perpendicular lies inside it
            cands.append((-a[1], a[0]) if cross == 0 else (a[0] + b[0], a[1] + b[1]))
            cands.append((-a[0] - b[0], -a[1] - b[1]) if cross < 0 else (a[1], -a[0]))
    return min(sum(1 for v in vs if u[0] * v[0] + u[1] * v[1] >= 0) for u in cands)


def scaled(points, k):
    return [(int(round(px * k)), int(round(py * k))) for px, py in points]


@pytest.fixture
def fig2():
    return {"ref3": REF3, "ref6": REF6, "ref7": REF7, "queries": QUERIES}


def frac(count, m):
    return Fraction(count, m)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

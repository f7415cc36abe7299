"""CSV and JSON interchange formats.

Every writer can prefix a ``# depthpatterns ...`` metadata line; every reader
skips lines starting with ``#``.  Reals are written with ``repr`` so they
round-trip exactly.
"""
from __future__ import annotations

import csv
import io
import json
from collections import OrderedDict
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .depth import as_points
from .modelsel import ParseError
from .patterns import PatternDistribution, Trajectory, label_to_pattern, pattern_to_label


def metadata_line(version: str, command: str, params: dict, seed) -> str:
    payload = json.dumps({"version": version, "command": command, "seed": seed, "params": params},
                         sort_keys=True, default=str)
    return f"# depthpatterns {payload}\n"


def read_metadata(text: str) -> Optional[dict]:
    first = text.splitlines()[0] if text else ""
    prefix = "# depthpatterns "
    if first.startswith(prefix):
        return json.loads(first[len(prefix):])
    return None


def _rows(text: str, source: str, header: Sequence[str]) -> list[list[str]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    got = next(reader, None)
    if got is None or [h.strip() for h in got] != list(header):
        raise ParseError(f"{source}: expected header {','.join(header)}, got {got}")
    return [row for row in reader]


def _float(value: str, source: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"{source}: row {lineno}: {value!r} is not a number") from None


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_table(fh: TextIO, header: Sequence[str], rows: Iterable[Sequence], meta: Optional[str]):
    if meta:
        fh.write(meta)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def parse_points(text: str, source: str = "<string>") -> np.ndarray:
    rows = _rows(text, source, ["x", "y"])
    pts = [(_float(r[0], source, i), _float(r[1], source, i)) for i, r in enumerate(rows, start=2)]
    try:
        return as_points(pts)
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from None


def read_points(path) -> np.ndarray:
    with open(path) as fh:
        return parse_points(fh.read(), str(path))


def write_points(fh: TextIO, points, meta: Optional[str] = None):
    write_table(fh, ["x", "y"], as_points(points), meta)


def parse_trajectories(text: str, source: str = "<string>") -> list[Trajectory]:
    """Trajectories from ``id,t,x,y`` rows, grouped by id in order of first appearance."""
    rows = _rows(text, source, ["id", "t", "x", "y"])
    groups: "OrderedDict[str, list]" = OrderedDict()
    for i, r in enumerate(rows, start=2):
        if len(r) != 4:
            raise ParseError(f"{source}: row {i} has {len(r)} fields, expected 4")
        try:
            t = int(r[1])
        except ValueError:
            raise ParseError(f"{source}: row {i}: time step {r[1]!r} is not an integer") from None
        groups.setdefault(r[0], []).append((t, _float(r[2], source, i), _float(r[3], source, i)))
    out = []
    for tid, items in groups.items():
        ts = [t for t, _, _ in items]
        if ts != sorted(ts) or len(set(ts)) != len(ts):
            raise ParseError(f"{source}: rows of trajectory {tid!r} are not sorted by t")
        try:
            out.append(Trajectory(tid, [(x, y) for _, x, y in items]))
        except ValueError as exc:
            raise ParseError(f"{source}: trajectory {tid!r}: {exc}") from None
    if not out:
        raise ParseError(f"{source}: no trajectory rows")
    return out


def read_trajectories(path) -> list[Trajectory]:
    with open(path) as fh:
        return parse_trajectories(fh.read(), str(path))


def write_trajectories(fh: TextIO, trajs: Sequence[Trajectory], meta: Optional[str] = None):
    def rows():
        for traj in trajs:
            for t, (x, y) in enumerate(traj.points):
                yield traj.id, t, x, y

    write_table(fh, ["id", "t", "x", "y"], rows(), meta)


def write_distribution(fh: TextIO, dist: PatternDistribution, meta: Optional[str] = None):
    counts = dist.counts if dist.counts is not None else [""] * len(dist.alphabet)
    write_table(fh, ["pattern", "frequency", "count"],
           ((pattern_to_label(p), f, c) for p, f, c in zip(dist.alphabet, dist.freqs, counts)), meta)


def parse_distribution(text: str, source: str = "<string>") -> PatternDistribution:
    rows = _rows(text, source, ["pattern", "frequency", "count"])
    try:
        alphabet = [label_to_pattern(r[0]) for r in rows]
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from None
    freqs = np.array([_float(r[1], source, i) for i, r in enumerate(rows, start=2)])
    has_counts = all(r[2] != "" for r in rows)
    counts = np.array([int(r[2]) for r in rows]) if has_counts else None
    n = int(counts.sum()) if has_counts else 0
    return PatternDistribution(order=len(alphabet[0]), alphabet=alphabet, freqs=freqs,
                               n_windows=n, n_tied_windows=0, counts=counts)


def distribution_json(dist: PatternDistribution) -> dict:
    return {
        "order": dist.order,
        "tie_policy": dist.tie_policy,
        "n_windows": dist.n_windows,
        "n_tied_windows": dist.n_tied_windows,
        "frequencies": dist.as_dict(),
    }


def parse_table(text: str, header: Sequence[str], source: str = "<string>") -> list[dict]:
    """Rows of a CSV with the given header as dicts of strings."""
    return [dict(zip(header, row)) for row in _rows(text, source, header)]


PATTERN_TABLE_HEADER = ["id", "pattern", "frequency", "count", "ci_low", "ci_high", "sigma2",
                        "bandwidth", "n_windows", "n_tied_windows"]


def parse_pattern_table(text: str, source: str = "<string>") -> "OrderedDict[str, PatternDistribution]":
    """Per-trajectory distributions from the long pattern table the CLI writes."""
    groups: "OrderedDict[str, list]" = OrderedDict()
    for row in parse_table(text, PATTERN_TABLE_HEADER, source):
        groups.setdefault(row["id"], []).append(row)
    out = OrderedDict()
    for tid, rows in groups.items():
        try:
            alphabet = [label_to_pattern(r["pattern"]) for r in rows]
            out[tid] = PatternDistribution(
                order=len(alphabet[0]),
                alphabet=alphabet,
                freqs=[float(r["frequency"]) for r in rows],
                n_windows=int(rows[0]["n_windows"]),
                n_tied_windows=int(rows[0]["n_tied_windows"]),
                counts=np.array([int(r["count"]) for r in rows]),
            )
        except ValueError as exc:
            raise ParseError(f"{source}: trajectory {tid!r}: {exc}") from None
    return out

"""Command-line driver.

Every output file starts with a ``# depthpatterns {...}`` line holding the
package version, the full parameter set, and the seed.  Seeds default to
``DEFAULT_SEED``; ``--seed random`` draws one from OS entropy and records it.
Exit codes: 0 success, 1 runtime or domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from . import io as dpio
from .depth import Disc, DomainError, Empirical, Gaussian, sample_disc, sample_gaussian
from .inference import (
    check_separation,
    depth_convergence_curve,
    disc_grid,
    exchangeable_statistics,
    pattern_summary,
    replication_rngs,
)
from .modelsel import (
    ANIMAL_COLUMNS,
    ANIMAL_HEADER,
    GridSpec,
    ParseError,
    grid_scan,
    load_animal_frequencies,
    pivot,
    scan_summary,
)
from .movement import UNIFORM, WalkParams, simulate_walk
from .patterns import BREAK_BY_INDEX, TIE_POLICIES, pattern_to_label, trajectory_depths

DEFAULT_SEED = 20240917
THREADS_ENV = "DEPTHPATTERNS_THREADS"


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str):
    if text == "random":
        return "random"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be a nonnegative integer or 'random'") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be a nonnegative integer or 'random'")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def resolve_seed(value) -> int:
    if value == "random":
        return int(np.random.SeedSequence().entropy % (2**63))
    return int(value)


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_reference(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ref-empirical", metavar="FILE|self", default=None,
                   help="empirical reference: an x,y (or id,t,x,y) CSV, or 'self' for each trajectory itself")
    g.add_argument("--ref-disc", action="store_true", help="rotation-invariant disc law with uniform marginals")
    g.add_argument("--ref-gaussian", metavar="mx,my,s11,s12,s22", type=_floats,
                   help="bivariate normal reference")


def _read_any_points(path: str) -> np.ndarray:
    with open(path) as fh:
        text = fh.read()
    body = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if body and body[0].replace(" ", "") == "id,t,x,y":
        return np.concatenate([t.points for t in dpio.parse_trajectories(text, path)])
    return dpio.parse_points(text, path)


def reference_from_args(args):
    """The chosen reference, or None for self-reference (the default)."""
    if args.ref_disc:
        return Disc()
    if args.ref_gaussian is not None:
        v = args.ref_gaussian
        if len(v) != 5:
            raise DomainError("--ref-gaussian needs five numbers mx,my,s11,s12,s22")
        return Gaussian((v[0], v[1]), ((v[2], v[3]), (v[3], v[4])))
    if args.ref_empirical in (None, "self"):
        return None
    return Empirical(_read_any_points(args.ref_empirical))


def _reference_desc(args) -> str:
    if args.ref_disc:
        return "disc"
    if args.ref_gaussian is not None:
        return "gaussian:" + ",".join(repr(v) for v in args.ref_gaussian)
    return "empirical:" + (args.ref_empirical or "self")


@contextlib.contextmanager
def _open_out(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _meta(command: str, params: dict, seed) -> str:
    return dpio.metadata_line(__version__, command, params, seed)


# --- subcommands ---------------------------------------------------------------

def cmd_depth(args) -> int:
    trajs = dpio.read_trajectories(args.input)
    ref = reference_from_args(args)
    meta = _meta("depth", {"input": args.input, "reference": _reference_desc(args)}, None)
    with _open_out(args.out) as fh:
        fh.write(meta)
        fh.write("id,t,depth\n")
        for traj in trajs:
            for t, d in enumerate(trajectory_depths(traj, ref)):
                fh.write(f"{traj.id},{t},{dpio.fmt(float(d))}\n")
    return 0


def cmd_patterns(args) -> int:
    trajs = dpio.read_trajectories(args.input)
    ref = reference_from_args(args)
    params = {"input": args.input, "reference": _reference_desc(args), "order": args.order,
              "ties": args.ties, "level": args.level, "bandwidth": args.bandwidth}
    meta = _meta("patterns", params, None)
    results = []
    for traj in trajs:
        dist, rows = pattern_summary(traj, ref, args.order, args.ties, args.level, args.bandwidth)
        results.append((traj.id, dist, rows))

    if args.wide:
        if args.order != 3 or args.ties != BREAK_BY_INDEX:
            raise DomainError("--wide needs --order 3 with tie-free patterns")
        header = ANIMAL_HEADER
        body = [[tid] + [dist.frequency(p) for p in ANIMAL_COLUMNS] for tid, dist, _ in results]
    else:
        header = dpio.PATTERN_TABLE_HEADER
        body = [[tid, pattern_to_label(r["pattern"]), r["freq"], r["count"], r["ci_low"], r["ci_high"],
                 r["sigma2"], r["bandwidth"], dist.n_windows, dist.n_tied_windows]
                for tid, dist, rows in results for r in rows]
    with _open_out(args.out) as fh:
        dpio.write_table(fh, header, body, meta)

    if args.json:
        doc = {"meta": json.loads(meta[len("# depthpatterns "):]), "trajectories": {}}
        for tid, dist, rows in results:
            entry = dpio.distribution_json(dist)
            entry["intervals"] = {pattern_to_label(r["pattern"]): {k: r[k] for k in
                                  ("ci_low", "ci_high", "sigma2", "bandwidth")} for r in rows}
            doc["trajectories"][tid] = entry
        with open(args.json, "w") as fh:
            json.dump(doc, fh, indent=2, allow_nan=True)
    return 0


def walk_params_from_args(args) -> WalkParams:
    if args.params:
        with open(args.params) as fh:
            base = WalkParams.from_json_dict(json.load(fh))
    else:
        base = WalkParams()
    changes = {}
    for flag, key in (("lam", "lam"), ("r", "r"), ("beta", "beta"), ("kappa", "kappa"), ("steps", "n_steps")):
        value = getattr(args, flag)
        if value is not None:
            changes[key] = value
    if args.center is not None:
        changes["center"] = args.center
    if args.x0 is not None:
        changes["x0"] = args.x0
    if args.a0 is not None:
        changes["a0"] = UNIFORM if args.a0 == UNIFORM else float(args.a0)
    return base.replace(**changes)


def cmd_simulate(args) -> int:
    params = walk_params_from_args(args)
    seed = resolve_seed(args.seed)
    params = params.replace(seed=seed)
    trajs = [simulate_walk(params, rng, id=f"walk{i:04d}") for i, rng in enumerate(replication_rngs(seed, args.reps))]
    meta = _meta("simulate", {**params.to_json_dict(), "reps": args.reps}, seed)
    with _open_out(args.out) as fh:
        dpio.write_trajectories(fh, trajs, meta)
    return 0


def grid_from_args(args) -> GridSpec:
    if args.config:
        with open(args.config) as fh:
            d = GridSpec.from_json_dict(json.load(fh)).to_json_dict()
    else:
        d = {**GridSpec().to_json_dict(), "seed": DEFAULT_SEED}
    d["lam"] = d.pop("lambda")
    for flag, key in (("r_values", "r_values"), ("kappas", "kappa_values"), ("betas", "beta_values"),
                      ("reps", "reps"), ("steps", "steps"), ("lam", "lam")):
        value = getattr(args, flag)
        if value is not None:
            d[key] = value
    if args.seed is not None:
        d["seed"] = resolve_seed(args.seed)
    for key in ("r_values", "kappa_values", "beta_values"):
        d[key] = tuple(d[key])
    return GridSpec(**d)


def cmd_scan(args) -> int:
    grid = grid_from_args(args)
    animals = load_animal_frequencies(args.animals)
    threads = args.threads if args.threads is not None else default_threads()

    def progress(row):
        if args.verbose:
            print(f"r={row.r:+d} kappa={row.kappa:g} beta={row.beta:g} objective={row.objective:.4f}",
                  file=sys.stderr)

    rows = grid_scan(grid, animals, workers=threads, progress=progress)
    params = {**grid.to_json_dict(), "animals": args.animals or "bundled:seal_pups_fwb.csv"}
    meta = _meta("scan", params, grid.seed)
    with _open_out(args.out) as fh:
        dpio.write_table(fh, ["r", "kappa", "beta", "objective", "stderr"],
                    ([r.r, r.kappa, r.beta, r.objective, r.stderr] for r in rows), meta)
    if args.pivot:
        table = pivot(rows)
        with open(args.pivot, "w", newline="") as fh:
            dpio.write_table(fh, list(table[0]), (list(t.values()) for t in table), meta)
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump({"meta": json.loads(meta[len("# depthpatterns "):]), **scan_summary(rows)}, fh, indent=2)
    return 0


def cmd_diagnose(args) -> int:
    seed = resolve_seed(args.seed)
    if args.convergence:
        sizes = args.sizes or (100, 1000, 10000)
        if args.ref_gaussian is not None:
            ref = reference_from_args(args)

            def sampler(n, rng):
                return sample_gaussian(n, ref, rng)
        else:
            ref, sampler = Disc(), sample_disc
        curve = depth_convergence_curve(ref, sampler, disc_grid(args.grid_k), sizes, args.reps, seed)
        meta = _meta("diagnose", {"mode": "convergence", "sizes": list(sizes), "reps": args.reps,
                                  "grid_k": args.grid_k, "reference": _reference_desc(args)
                                  if args.ref_gaussian is not None else "disc"}, seed)
        with _open_out(args.out) as fh:
            dpio.write_table(fh, ["n", "median_sup_error"], curve, meta)
    elif args.clt:
        if args.input:
            trajs = dpio.read_trajectories(args.input)
            ref = reference_from_args(args)
            meta = _meta("diagnose", {"mode": "clt", "input": args.input, "order": args.order,
                                      "ties": args.ties, "reference": _reference_desc(args)}, None)
            body = []
            for traj in trajs:
                _, rows = pattern_summary(traj, ref, args.order, args.ties, args.level)
                body += [[pattern_to_label(r["pattern"]), r["freq"], r["ci_low"], r["ci_high"],
                          r["sigma2"], r["bandwidth"]] for r in rows]
            header = ["pattern", "freq", "ci_low", "ci_high", "sigma2", "bandwidth"]
        else:
            stats = exchangeable_statistics(args.n, args.reps, seed=seed)
            meta = _meta("diagnose", {"mode": "clt", "n": args.n, "reps": args.reps,
                                      "pattern": "(0, 1, 2)"}, seed)
            header = ["replication", "statistic"]
            body = list(enumerate(stats.tolist()))
        with _open_out(args.out) as fh:
            dpio.write_table(fh, header, body, meta)
    else:
        trajs = dpio.read_trajectories(args.input) if args.input else None
        if trajs is None:
            raise DomainError("--separation needs --input")
        ref = reference_from_args(args)
        meta = _meta("diagnose", {"mode": "separation", "input": args.input, "tolerance": args.tolerance,
                                  "reference": _reference_desc(args)}, None)
        body = []
        for traj in trajs:
            rep = check_separation(trajectory_depths(traj, ref), args.tolerance)
            body.append([traj.id, rep.n_pairs_tied, rep.min_depth_gap, rep.tolerance])
        with _open_out(args.out) as fh:
            dpio.write_table(fh, ["id", "n_pairs_tied", "min_depth_gap", "tolerance"], body, meta)
    return 0


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthpatterns", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("depth", help="depth of every trajectory point")
    p.add_argument("--input", required=True, help="trajectory CSV with header id,t,x,y")
    _add_reference(p)
    p.add_argument("--out", default=None, help="output CSV (default stdout)")
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("patterns", help="depth-pattern frequencies with confidence intervals")
    p.add_argument("--input", required=True)
    _add_reference(p)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--ties", choices=TIE_POLICIES, default=BREAK_BY_INDEX)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--bandwidth", type=int, default=None)
    p.add_argument("--wide", action="store_true", help="one row per trajectory in animal-table columns")
    p.add_argument("--json", default=None, help="also write a JSON document keyed by pattern label")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("simulate", help="simulate biased (anti)persistent walks")
    p.add_argument("--params", default=None, help="walk parameters as flat JSON; flags override")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--r", type=int, choices=(-1, 1), default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--center", type=_floats, default=None, metavar="X,Y")
    p.add_argument("--x0", type=_floats, default=None, metavar="X,Y")
    p.add_argument("--a0", default=None, help="initial heading in radians or 'uniform'")
    p.add_argument("--reps", type=_positive_int, default=1)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="grid scan of the animal distance objective")
    p.add_argument("--config", default=None, help="grid as JSON; flags override")
    p.add_argument("--r-values", type=_ints, default=None)
    p.add_argument("--kappas", type=_floats, default=None)
    p.add_argument("--betas", type=_floats, default=None)
    p.add_argument("--reps", type=_positive_int, default=None)
    p.add_argument("--steps", type=_positive_int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--animals", default=None, help="animal frequency CSV (default: bundled table)")
    p.add_argument("--threads", type=_positive_int, default=None,
                   help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--out", default=None)
    p.add_argument("--pivot", default=None, help="also write a kappa-by-beta table")
    p.add_argument("--summary", default=None, help="also write a JSON summary")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("diagnose", help="convergence, CLT and separation diagnostics")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--convergence", action="store_true")
    mode.add_argument("--clt", action="store_true")
    mode.add_argument("--separation", action="store_true")
    p.add_argument("--input", default=None)
    _add_reference(p)
    p.add_argument("--sizes", type=_ints, default=None)
    p.add_argument("--reps", type=_positive_int, default=20)
    p.add_argument("--grid-k", type=_positive_int, default=5)
    p.add_argument("--n", type=_positive_int, default=5000)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--ties", choices=TIE_POLICIES, default=BREAK_BY_INDEX)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ParseError, ValueError, OSError) as exc:
        print(f"depthpatterns {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Biased (anti)persistent random walks.

Each step draws a heading from a von Mises law whose location blends the
previous heading (sign ``r``, weight ``1 - beta``) with the bearing towards a
center (weight ``beta``), and an exponential step length.  ``kappa = 0`` gives
the simple random walk with uniform headings.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .depth import DomainError
from .patterns import Trajectory

TWO_PI = 2.0 * math.pi
# below this concentration the von Mises law is uniform to double precision
_KAPPA_UNIFORM = 1e-8

UNIFORM = "uniform"


class Direction(NamedTuple):
    angle: float
    degenerate: bool


@dataclass(frozen=True)
class WalkParams:
    lam: float = 0.02
    r: int = 1
    beta: float = 0.0
    kappa: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)
    n_steps: int = 1000
    x0: tuple[float, float] = (0.0, 0.0)
    a0: Union[float, str] = UNIFORM
    seed: Optional[int] = None

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError("lambda must be a positive finite rate")
        if self.r not in (-1, 1):
            raise DomainError("r must be -1 or +1")
        if not (0.0 <= self.beta <= 1.0):
            raise DomainError("beta must lie in [0, 1]")
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise DomainError("kappa must be finite and nonnegative")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise DomainError("n_steps must be a positive integer")
        for name in ("center", "x0"):
            v = tuple(float(c) for c in getattr(self, name))
            if len(v) != 2 or not all(math.isfinite(c) for c in v):
                raise DomainError(f"{name} must be a finite 2-vector")
            object.__setattr__(self, name, v)
        if self.a0 != UNIFORM:
            a0 = float(self.a0)
            if not (0.0 <= a0 < TWO_PI):
                raise DomainError("a0 must be in [0, 2pi) or 'uniform'")
            object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "r", int(self.r))

    def replace(self, **changes) -> "WalkParams":
        d = asdict(self)
        d.update(changes)
        return WalkParams(**d)

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "r": self.r,
            "beta": self.beta,
            "kappa": self.kappa,
            "center_x": self.center[0],
            "center_y": self.center[1],
            "n_steps": self.n_steps,
            "x0_x": self.x0[0],
            "x0_y": self.x0[1],
            "a0": self.a0,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "WalkParams":
        known = {"lambda", "r", "beta", "kappa", "center_x", "center_y",
                 "n_steps", "x0_x", "x0_y", "a0", "seed"}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown walk parameter keys: {sorted(unknown)}")
        default = cls()
        return cls(
            lam=float(d.get("lambda", default.lam)),
            r=int(d.get("r", default.r)),
            beta=float(d.get("beta", default.beta)),
            kappa=float(d.get("kappa", default.kappa)),
            center=(float(d.get("center_x", 0.0)), float(d.get("center_y", 0.0))),
            n_steps=int(d.get("n_steps", default.n_steps)),
            x0=(float(d.get("x0_x", 0.0)), float(d.get("x0_y", 0.0))),
            a0=d.get("a0", UNIFORM),
            seed=d.get("seed"),
        )


def _uniform_open(rng: np.random.Generator) -> float:
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


def sample_von_mises(mu: float, kappa: float, rng: np.random.Generator) -> float:
    """One von Mises draw in [0, 2pi) by Best and Fisher's wrapped-Cauchy rejection."""
    if not math.isfinite(kappa) or kappa < 0:
        raise DomainError("kappa must be finite and nonnegative")
    if kappa < _KAPPA_UNIFORM:
        return rng.random() * TWO_PI
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    s = (1.0 + rho * rho) / (2.0 * rho)
    while True:
        u1 = rng.random()
        u2 = _uniform_open(rng)
        u3 = rng.random()
        z = math.cos(math.pi * u1)
        f = (1.0 + s * z) / (s + z)
        c = kappa * (s - f)
        if c * (2.0 - c) - u2 > 0.0 or math.log(c / u2) + 1.0 - c >= 0.0:
            break
    f = min(1.0, max(-1.0, f))
    theta = mu + math.copysign(math.acos(f), u3 - 0.5)
    return theta % TWO_PI


def sample_step_length(lam: float, rng: np.random.Generator, size: Optional[int] = None):
    """Exponential step length(s) with rate ``lam`` by inverting the CDF."""
    if not (math.isfinite(lam) and lam > 0):
        raise DomainError("lambda must be positive")
    if size is None:
        return -math.log(_uniform_open(rng)) / lam
    u = rng.random(size)
    u[u == 0.0] = np.finfo(float).tiny
    return -np.log(u) / lam


def bearing(x, c) -> Direction:
    """Direction from ``x`` towards ``c`` in (-pi, pi]; 0 (flagged) when they coincide."""
    dx = float(c[0]) - float(x[0])
    dy = float(c[1]) - float(x[1])
    if dx == 0.0 and dy == 0.0:
        return Direction(0.0, True)
    return Direction(math.atan2(dy, dx), False)


def turning_location(a_prev: float, b: float, r: int, beta: float) -> Direction:
    """Location of the next heading: atan2 of the blended unit vectors."""
    w = r * (1.0 - beta)
    d1 = w * math.cos(a_prev) + beta * math.cos(b)
    d2 = w * math.sin(a_prev) + beta * math.sin(b)
    if d1 == 0.0 and d2 == 0.0:
        return Direction(b, True)
    return Direction(math.atan2(d2, d1), False)


def simulate_walk(params: WalkParams, rng: np.random.Generator, id: str = "walk") -> Trajectory:
    """Positions x(0), ..., x(n_steps) of one walk.

    ``meta`` records the number of steps where the bearing or the blended
    location was undefined and a fallback angle was used.
    """
    n = params.n_steps
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    x, y = params.x0
    xs[0], ys[0] = x, y
    a = rng.random() * TWO_PI if params.a0 == UNIFORM else float(params.a0)
    cx, cy = params.center
    r, beta, kappa, lam = params.r, params.beta, params.kappa, params.lam
    degenerate = 0
    for t in range(n):
        if kappa == 0.0:
            # location is irrelevant for a uniform heading
            a = rng.random() * TWO_PI
        else:
            b, flag_b = bearing((x, y), (cx, cy))
            mu, flag_mu = turning_location(a, b, r, beta)
            degenerate += flag_b or flag_mu
            a = sample_von_mises(mu, kappa, rng)
        step = sample_step_length(lam, rng)
        x = x + step * math.cos(a)
        y = y + step * math.sin(a)
        xs[t + 1], ys[t + 1] = x, y
    return Trajectory(id, np.stack([xs, ys], axis=1), meta={"degenerate_directions": degenerate})

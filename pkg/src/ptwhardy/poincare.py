"""Poincaré inequality checks and the two-point curve characterization.

The ball form compares ``avg_B |u - u_B|`` with
``C_PI * r * (avg_{lam B} g^p)^(1/p)``.  The curve form bounds the cheapest
budgeted curve between ``x`` and ``y`` by
``C_A * d(x, y) * (M_{p, kappa d} g(x) + M_{p, kappa d} g(y))``.
On a finite space both always hold for large enough constants, so the
useful output is the constant, which :func:`estimate_CA` estimates from
below by sampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .certificate import Certificate, eps_num, holds
from .curves import CurveFamilyQuery, is_upper_gradient, min_integral_path
from .maximal import as_field, maximal_at
from .rng import SplitMix64
from .sampling import sample_gradient
from .space import Ball, Space, Vertex

UPPER_GRADIENT_CHECK_MAX = 10


@dataclass(frozen=True)
class PoincareParams:
    p: float
    C_PI: float
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (self.p >= 1 and self.C_PI > 0 and self.lam >= 1):
            raise ValueError("need p >= 1, C_PI > 0, lambda >= 1")


@dataclass(frozen=True)
class CurveCharParams:
    p: float
    C_A: float
    nu: float
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not (self.p >= 1 and self.C_A > 0 and self.nu > 1 and self.kappa >= 1):
            raise ValueError("need p >= 1, C_A > 0, nu > 1, kappa >= 1")


def poincare_ball_check(space: Space, u, g, params: PoincareParams, B: Ball) -> Certificate:
    u = as_field(space, u)
    g = as_field(space, g)
    if np.any(g < 0):
        raise ValueError("g must be nonnegative")
    if not B.members or B.radius <= 0 or B.center not in B.members:
        raise ValueError("invalid ball")
    mu = space.measure
    idx = np.array(sorted(B.members))
    w = mu[idx] / mu[idx].sum()
    uB = float(w @ u[idx])
    lhs = float(w @ np.abs(u[idx] - uB))
    big = np.flatnonzero(space.dist_matrix[B.center] < params.lam * B.radius)
    gmean = float(mu[big] @ g[big] ** params.p / mu[big].sum()) ** (1.0 / params.p)
    rhs = params.C_PI * B.radius * gmean
    notes = []
    if space.n <= UPPER_GRADIENT_CHECK_MAX:
        ok = is_upper_gradient(space, u, g)
        notes.append("upper-gradient: verified" if ok else "upper-gradient: VIOLATED")
    else:
        notes.append("upper-gradient: asserted")
    return Certificate(
        kind="poincare_ball",
        lhs=lhs,
        rhs=rhs,
        passed=holds(lhs, rhs),
        constants={"p": params.p, "C_PI": params.C_PI, "lambda": params.lam, "radius": B.radius, "u_B": uB},
        witnesses={"center": space.ids[B.center]},
        notes=notes,
    )


def _two_point_parts(space: Space, g: np.ndarray, x: int, y: int, p: float, nu: float, kappa: float):
    d = float(space.dist_matrix[x, y])
    path, value = min_integral_path(space, g, CurveFamilyQuery(x, y, nu))
    r = kappa * d
    scale = d * (maximal_at(space, g, p, x, r) + maximal_at(space, g, p, y, r))
    return path, value, scale, d


def two_point_char(space: Space, g, x: Vertex, y: Vertex, params: CurveCharParams) -> Certificate:
    g = as_field(space, g)
    if np.any(g < 0):
        raise ValueError("g must be nonnegative")
    xi, yi = space.index(x), space.index(y)
    if xi == yi:
        raise ValueError("x and y must differ")
    path, value, scale, d = _two_point_parts(space, g, xi, yi, params.p, params.nu, params.kappa)
    rhs = params.C_A * scale
    return Certificate(
        kind="two_point_char",
        lhs=value,
        rhs=rhs,
        passed=holds(value, rhs),
        constants={"p": params.p, "C_A": params.C_A, "nu": params.nu, "kappa": params.kappa, "d": d},
        witnesses={"path": path.to_dict(space, value)},
    )


def two_point_ratio(space: Space, g, x: int, y: int, p: float, nu: float, kappa: float) -> tuple[float, object]:
    """``lhs / rhs`` of the curve form without the constant (``0/0 -> 0``)."""
    path, value, scale, _ = _two_point_parts(space, g, x, y, p, nu, kappa)
    if scale <= 0:
        return (0.0 if value <= eps_num() else np.inf), path
    return value / scale, path


def estimate_CA(
    space: Space,
    p: float,
    nu: float,
    kappa: float,
    trials: int,
    seed: int,
    extra_fields: Iterable = (),
) -> float:
    """Largest sampled ratio of the two-point characterization; a lower bound on ``C_A``.

    ``extra_fields`` are evaluated on every pair in addition to the sampled
    trials, so a run can include the candidates it is about to test.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = SplitMix64(seed)
    n = space.n
    best = 0.0
    for t in range(trials):
        x = rng.randint(0, n - 1)
        y = rng.randint(0, n - 2)
        if y >= x:
            y += 1
        g = sample_gradient(rng, space, t, x, [y])
        ratio, _ = two_point_ratio(space, g, x, y, p, nu, kappa)
        best = max(best, ratio)
    for g in extra_fields:
        g = as_field(space, g)
        for x in range(n):
            for y in range(x + 1, n):
                ratio, _ = two_point_ratio(space, g, x, y, p, nu, kappa)
                best = max(best, ratio)
    return float(best)


def two_point_rows(space: Space, g, params: CurveCharParams) -> list[dict]:
    """One row per unordered pair: lhs, rhs, ratio and witness length."""
    g = as_field(space, g)
    rows = []
    for x in range(space.n):
        for y in range(x + 1, space.n):
            cert = two_point_char(space, g, x, y, params)
            ratio = cert.lhs / cert.rhs if cert.rhs > 0 else (0.0 if cert.lhs <= eps_num() else float("inf"))
            rows.append(
                {
                    "x": space.ids[x],
                    "y": space.ids[y],
                    "lhs": cert.lhs,
                    "rhs": cert.rhs,
                    "ratio": ratio,
                    "witness_length": cert.witnesses["path"]["length"],
                    "pass": cert.passed,
                }
            )
    return rows

"""Restricted maximal functions and the scale-invariant weak-type estimate.

Fields are plain float arrays indexed like ``space.ids``.

``M_{p,r} f(x)`` is ``|f(x)|`` for ``r = 0`` and otherwise the largest
``(avg_B |f|^p)^(1/p)`` over balls ``B = B(y, t)`` with ``x in B`` and
``0 < t < r``.  The supremum is a finite maximum over the rows of the space's
:class:`~ptwhardy.space.BallTable`, so no sampling of radii is involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .certificate import Certificate, holds
from .space import Space, Vertex, doubling_constant


@dataclass(frozen=True)
class MaximalQuery:
    p: float
    r: float
    x: Vertex

    def __post_init__(self) -> None:
        _check_pr(self.p, self.r)


def _check_pr(p: float, r: float) -> None:
    if not p >= 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    if not r >= 0:
        raise ValueError(f"radius r must be >= 0, got {r}")


def as_field(space: Space, values) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    if f.shape != (space.n,):
        raise ValueError(f"field must have {space.n} values, got shape {f.shape}")
    return f


def check_gradient_field(g: np.ndarray, eps: float = 0.0) -> None:
    """Raise unless ``0 <= g <= 1`` everywhere."""
    if np.any(g < -eps) or np.any(g > 1 + eps):
        raise ValueError("gradient candidates must take values in [0, 1]")


def load_field(space: Space, text: str) -> np.ndarray:
    """Parse ``{"values": {vertexId: number, ...}}``; every vertex is required."""
    try:
        values = json.loads(text)["values"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed field description: {exc!r}") from exc
    missing = [v for v in space.ids if v not in values]
    if missing:
        raise ValueError(f"field is missing vertices {missing[:5]}")
    return np.array([float(values[v]) for v in space.ids])


def dump_field(space: Space, f: np.ndarray) -> str:
    return json.dumps({"values": {v: float(x) for v, x in zip(space.ids, f)}}, indent=1)


def restricted_maximal(space: Space, f, q: MaximalQuery) -> float:
    f = as_field(space, f)
    x = space.index(q.x)
    if q.r == 0:
        return float(abs(f[x]))
    table = space.balls
    means = table.power_means(f, q.p)
    return float(np.max(means[table.admissible(x, q.r)]) ** (1.0 / q.p))


def maximal_all(space: Space, f, p: float, r: float) -> np.ndarray:
    """``M_{p,r} f`` evaluated at every vertex."""
    _check_pr(p, r)
    f = as_field(space, f)
    if r == 0:
        return np.abs(f)
    table = space.balls
    means = table.power_means(f, p)
    keep = table.lo < r
    sub = np.where(table.members[keep], means[keep, None], -np.inf)
    return sub.max(axis=0) ** (1.0 / p)


def maximal_at(space: Space, f, p: float, x: int, r: float) -> float:
    """Fast path of :func:`restricted_maximal` for internal callers (index ``x``)."""
    if r == 0:
        return float(abs(f[x]))
    table = space.balls
    mask = table.admissible(x, r)
    sub = table.memberf[mask]
    vals = sub @ (np.abs(f) ** p * table.measure) / table.mass[mask]
    return float(vals.max() ** (1.0 / p))


def weak_type_check(
    space: Space,
    f,
    q: float,
    r: float,
    s: float,
    lam: float,
    x: Vertex,
    D: float | None = None,
) -> Certificate:
    """Check ``M_{1,r} 1_E(x) <= D^5 (M_{q,r+3s} f(x))^q / lam^q`` with ``E = {M_{q,s} f > lam}``."""
    if not q >= 1:
        raise ValueError("q must be >= 1")
    if not (r > 0 and s > 0 and lam > 0):
        raise ValueError("r, s and lambda must be positive")
    f = as_field(space, f)
    xi = space.index(x)
    if D is None:
        D = doubling_constant(space)
    level = maximal_all(space, f, q, s) > lam
    lhs = maximal_at(space, level.astype(float), 1.0, xi, r)
    big = maximal_at(space, f, q, xi, r + 3 * s)
    rhs = D**5 * big**q / lam**q
    return Certificate(
        kind="weak_type",
        lhs=lhs,
        rhs=rhs,
        passed=holds(lhs, rhs),
        constants={"D": D, "q": q, "r": r, "s": s, "lambda": lam},
        witnesses={"level_set": [space.ids[i] for i in np.flatnonzero(level)]},
    )

"""Adversarial families of gradient candidates ``g`` with values in [0, 1].

The families stress the curve infimum: annuli and walls around the source
force every curve to pay, corridors leave a single cheap route, bumps and
noise cover the rest.  Trial ``t`` uses family ``t % len(FAMILIES)``, so the
first trial is always the constant field 1.
"""

from __future__ import annotations

import numpy as np

from .rng import SplitMix64
from .space import Space

FAMILIES = ("ones", "annulus", "corridor", "wall", "bump", "blend", "noise")


def _geodesic_vertices(space: Space, x: int, targets: list[int]) -> list[int]:
    D = space.dist_matrix
    t = min(targets, key=lambda v: (D[x, v], v))
    # walk back along tight edges from the nearest target
    path = [t]
    v = t
    while v != x:
        v = min(
            (w for w, ell in space.adj[v] if abs(D[x, w] + ell - D[x, v]) <= 1e-12 * max(1.0, D[x, v])),
            key=lambda w: (D[x, w], w),
        )
        path.append(v)
    return path[::-1]


def sample_gradient(rng: SplitMix64, space: Space, trial: int, x: int, targets: list[int]) -> np.ndarray:
    D = space.dist_matrix
    n = space.n
    family = FAMILIES[trial % len(FAMILIES)]
    dx = D[x]
    dt = D[:, targets].min(axis=1)
    reach = float(dt[x]) if dt[x] > 0 else float(dx.max())
    if family == "ones":
        return np.ones(n)
    if family == "noise":
        return np.array(rng.uniform_array(n))
    if family == "annulus":
        a = rng.uniform(0.0, reach)
        b = a + rng.uniform(0.1, 1.0) * reach
        return ((dx >= a) & (dx < b)).astype(float)
    if family == "wall":
        # a band at fixed distance from the target set, between x and the target
        a = rng.uniform(0.0, reach)
        w = rng.uniform(0.05, 0.5) * reach
        return ((dt >= a) & (dt < a + w)).astype(float) * rng.uniform(0.5, 1.0)
    if family == "corridor":
        geo = _geodesic_vertices(space, x, targets)
        width = rng.uniform(0.0, 0.5) * reach
        near = D[geo].min(axis=0) <= width
        g = np.ones(n)
        g[near] = rng.uniform(0.0, 0.3)
        return g
    if family == "bump":
        c = rng.randint(0, n - 1)
        rho = rng.uniform(0.0, reach)
        w = rng.uniform(0.1, 1.0) * max(reach, 1e-12)
        return np.clip(1.0 - np.abs(D[c] - rho) / w, 0.0, 1.0)
    if family == "blend":
        g = np.zeros(n)
        for _ in range(rng.randint(1, 3)):
            mask = np.array([rng.random() < 0.4 for _ in range(n)])
            g += rng.uniform(0.2, 1.0) * mask
        return np.clip(g, 0.0, 1.0)
    raise AssertionError(family)

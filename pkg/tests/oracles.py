"""Slow, independent reference implementations used to freeze and cross-check values."""

from __future__ import annotations

import itertools

import numpy as np


def floyd_warshall(space) -> np.ndarray:
    n = space.n
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for i, j, ell in space.edges:
        D[i, j] = D[j, i] = min(D[i, j], ell)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if D[i, k] + D[k, j] < D[i, j]:
                    D[i, j] = D[i, k] + D[k, j]
    return D


def dense_radii(space, max_radius: float, per_unit: int = 400) -> np.ndarray:
    """A fine radius grid plus every pairwise distance nudged both ways."""
    D = np.unique(floyd_warshall(space))
    grid = np.linspace(1e-9, max_radius, int(per_unit * max_radius) + 2)
    nudged = np.concatenate([D - 1e-7, D + 1e-7])
    r = np.concatenate([grid, nudged])
    return np.unique(r[(r > 0) & (r < max_radius)])


def brute_ball_sets(space, containing: int, max_radius: float) -> set:
    D = floyd_warshall(space)
    out = set()
    for y in range(space.n):
        for t in dense_radii(space, max_radius):
            members = frozenset(int(v) for v in np.flatnonzero(D[y] < t))
            if containing in members:
                out.add(members)
    return out


def brute_maximal(space, f, p: float, x: int, r: float) -> float:
    if r == 0:
        return abs(float(f[x]))
    mu = np.asarray(space.measure)
    f = np.abs(np.asarray(f, dtype=float))
    best = 0.0
    for members in brute_ball_sets(space, x, r):
        idx = sorted(members)
        best = max(best, float((mu[idx] @ f[idx] ** p) / mu[idx].sum()))
    return best ** (1.0 / p)


def brute_doubling(space) -> float:
    D = floyd_warshall(space)
    mu = np.asarray(space.measure)
    best = 1.0
    top = float(D.max()) * 1.01 + 0.01
    for x in range(space.n):
        for r in dense_radii(space, top):
            best = max(best, mu[D[x] < 2 * r].sum() / mu[D[x] < r].sum())
    return best


def all_simple_paths(space, s: int, targets: set):
    """Every simple path from ``s`` ending at its first visit of a target."""
    def walk(path, seen):
        v = path[-1]
        if v in targets and len(path) > 1:
            yield list(path)
            return
        for w, _ in space.adj[v]:
            if w not in seen:
                yield from walk(path + [w], seen | {w})
    if s in targets:
        return
    yield from walk([s], {s})


def trapezoid(space, g, verts) -> float:
    return sum(space.edge_length(a, b) * (g[a] + g[b]) / 2 for a, b in zip(verts[:-1], verts[1:]))


def path_len(space, verts) -> float:
    return sum(space.edge_length(a, b) for a, b in zip(verts[:-1], verts[1:]))


def grid_product(levels: int, k: int):
    return itertools.product([i / levels for i in range(levels + 1)], repeat=k)

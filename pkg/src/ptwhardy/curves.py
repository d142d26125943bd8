"""Discrete curves, line integrals and minimal-integral path search.

A curve is a vertex sequence along edges.  Line integrals use the
trapezoid rule on every traversed edge, ``len(u, v) * (g(u) + g(v)) / 2``,
so a constant field integrates to arc length.

The curve families have a length budget: paths from ``source`` to the target
(a vertex or a vertex set) of length at most ``nu * dist(source, target)``.
:func:`min_integral_path` finds the smallest integral in such a family with
a label-setting search over ``(vertex, length, integral)`` labels;
:func:`brute_force_min_path` enumerates simple paths and serves as its
oracle.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Collection, Iterator, Union

import numpy as np

from .certificate import eps_num
from .space import DomainSet, Space, Vertex

BRUTE_FORCE_MAX_VERTICES = 12


class InfeasibleError(ValueError):
    """No curve satisfies the length budget."""


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class PathRec:
    vertices: tuple
    length: float

    def __post_init__(self) -> None:
        if len(self.vertices) < 2:
            raise ValueError("a curve needs at least two vertices")

    @classmethod
    def from_vertices(cls, space: Space, vertices) -> "PathRec":
        vs = tuple(space.index(v) for v in vertices)
        if len(vs) < 2:
            raise ValueError("a curve needs at least two vertices")
        length = 0.0
        for a, b in zip(vs, vs[1:]):
            length += space.edge_length(a, b)
        return cls(vs, length)

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def to_dict(self, space: Space, integral: float | None = None) -> dict:
        out = {"vertices": [space.ids[v] for v in self.vertices], "length": self.length}
        if integral is not None:
            out["integral"] = float(integral)
        return out


Target = Union[Vertex, Collection[Vertex]]


@dataclass(frozen=True)
class CurveFamilyQuery:
    source: Vertex
    target: Target
    nu: float

    def __post_init__(self) -> None:
        if not self.nu > 1:
            raise ValueError(f"nu must exceed 1, got {self.nu}")


def _targets(space: Space, target: Target) -> frozenset:
    if isinstance(target, (str, int, np.integer)):
        return frozenset([space.index(target)])
    return frozenset(space.index(v) for v in target)


def _budget(space: Space, source: int, targets: frozenset, nu: float) -> tuple[float, np.ndarray]:
    if source in targets:
        raise ValueError("source lies in the target set")
    tlist = sorted(targets)
    to_target = space.dist_matrix[:, tlist].min(axis=1)
    budget = nu * to_target[source]
    return budget + eps_num() * max(1.0, budget), to_target


def _check_nonneg(g: np.ndarray) -> None:
    if np.any(g < 0):
        raise ValueError("line-integral fields must be nonnegative")


def _as_array(space: Space, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (space.n,):
        raise ValueError(f"field must have {space.n} values")
    return g


def path_integral(space: Space, g, path: PathRec) -> float:
    g = _as_array(space, g)
    total = 0.0
    for a, b in zip(path.vertices, path.vertices[1:]):
        total += space.edge_length(a, b) * (g[a] + g[b]) / 2
    return total


def path_coefficients(space: Space, path: PathRec) -> np.ndarray:
    """Vector ``c`` with ``path_integral(g, path) == c @ g``."""
    c = np.zeros(space.n)
    for a, b in zip(path.vertices, path.vertices[1:]):
        half = space.edge_length(a, b) / 2
        c[a] += half
        c[b] += half
    return c


def min_integral_path(space: Space, g, query: CurveFamilyQuery) -> tuple[PathRec, float]:
    """Minimal trapezoid integral of ``g`` over the budgeted curve family.

    Labels are settled in order of (integral, length, id sequence); a label is
    discarded once an earlier-settled label at the same vertex is no longer
    and no heavier.  The first settled target label is optimal and carries
    the tie-break order: shorter length, then lexicographically smaller ids.
    """
    g = _as_array(space, g)
    _check_nonneg(g)
    source = space.index(query.source)
    targets = _targets(space, query.target)
    limit, to_target = _budget(space, source, targets, query.nu)
    ids = space.ids
    adj = space.adj
    best_len = [math.inf] * space.n
    heap = [(0.0, 0.0, (ids[source],), (source,))]
    while heap:
        integ, length, key, path = heapq.heappop(heap)
        v = path[-1]
        if v in targets:
            return PathRec(path, length), integ
        if length >= best_len[v]:
            continue
        best_len[v] = length
        gv = g[v]
        for w, ell in adj[v]:
            nl = length + ell
            if nl >= best_len[w] or nl + to_target[w] > limit:
                continue
            heapq.heappush(heap, (integ + ell * (gv + g[w]) / 2, nl, key + (ids[w],), path + (w,)))
    raise InfeasibleError("no curve within the length budget")


def feasible_simple_paths(space: Space, source: int, targets: frozenset, limit: float) -> Iterator[tuple]:
    """All simple paths from ``source`` that stop at the first target and fit ``limit``."""
    tlist = sorted(targets)
    to_target = space.dist_matrix[:, tlist].min(axis=1)
    adj = space.adj
    path = [source]
    on_path = {source}

    def walk(v: int, length: float):
        for w, ell in adj[v]:
            if w in on_path:
                continue
            nl = length + ell
            if nl + to_target[w] > limit:
                continue
            path.append(w)
            if w in targets:
                yield tuple(path), nl
            else:
                on_path.add(w)
                yield from walk(w, nl)
                on_path.discard(w)
            path.pop()

    yield from walk(source, 0.0)


def brute_force_min_path(space: Space, g, query: CurveFamilyQuery) -> tuple[PathRec, float]:
    """Exhaustive oracle for :func:`min_integral_path` (small spaces only)."""
    if space.n > BRUTE_FORCE_MAX_VERTICES:
        raise InstanceTooLarge(f"brute force limited to {BRUTE_FORCE_MAX_VERTICES} vertices")
    g = _as_array(space, g)
    _check_nonneg(g)
    source = space.index(query.source)
    targets = _targets(space, query.target)
    limit, _ = _budget(space, source, targets, query.nu)
    best = None
    for verts, length in feasible_simple_paths(space, source, targets, limit):
        integ = 0.0
        for a, b in zip(verts, verts[1:]):
            integ += space.edge_length(a, b) * (g[a] + g[b]) / 2
        key = (integ, length, tuple(space.ids[v] for v in verts))
        if best is None or key < best[0]:
            best = (key, verts)
    if best is None:
        raise InfeasibleError("no curve within the length budget")
    (integ, length, _), verts = best
    return PathRec(verts, length), integ


def inf_connection_potential(space: Space, h, domain: DomainSet) -> np.ndarray:
    """``u(y)`` = least integral of ``h`` over all paths from ``y`` to the complement.

    Multi-source Dijkstra from the complement with edge weights
    ``len * (h(u) + h(v)) / 2`` (zero weights allowed).
    """
    h = _as_array(space, h)
    _check_nonneg(h)
    u = np.full(space.n, np.inf)
    heap = []
    for c in sorted(domain.complement):
        u[c] = 0.0
        heap.append((0.0, c))
    heapq.heapify(heap)
    done = np.zeros(space.n, dtype=bool)
    while heap:
        du, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for w, ell in space.adj[v]:
            nd = du + ell * (h[v] + h[w]) / 2
            if nd < u[w]:
                u[w] = nd
                heapq.heappush(heap, (nd, w))
    return u


def upper_gradient_violation(space: Space, u, g) -> float:
    """Largest excess of ``|u(a) - u(b)|`` over the integral of ``g`` along an edge.

    Checking every edge is equivalent to checking every path, because path
    integrals add up over edges and ``|u(start) - u(end)|`` is bounded by the
    sum of the edge differences.
    """
    u = _as_array(space, u)
    g = _as_array(space, g)
    worst = -np.inf
    for a, b, ell in space.edges:
        worst = max(worst, abs(u[a] - u[b]) - ell * (g[a] + g[b]) / 2)
    return float(worst)


def is_upper_gradient(space: Space, u, g) -> bool:
    g = _as_array(space, g)
    if np.any(g < 0):
        return False
    return upper_gradient_violation(space, u, g) <= eps_num()

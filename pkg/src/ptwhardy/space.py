"""Finite metric measure spaces given by weighted graphs.

A :class:`Space` stores a connected undirected graph with positive edge
lengths and positive vertex measures.  The metric is always the induced
shortest-path metric, so every pair of points is joined by a path whose
length equals their distance.

Balls are open, ``B(x, r) = {y : d(x, y) < r}``.  For a fixed center the
member set only changes when ``r`` crosses one of the distances ``d(x, v)``,
which makes suprema over balls finite maxima; :class:`BallTable` holds one
row per (center, critical distance) pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

Vertex = Union[int, str]


class SpaceError(ValueError):
    """Base class for malformed or invalid space descriptions."""


class SpaceParseError(SpaceError):
    pass


class SpaceValidationError(SpaceError):
    pass


class Space:
    """Connected weighted graph with vertex measures and its path metric."""

    def __init__(
        self,
        ids: Sequence[str],
        measure: Sequence[float],
        edges: Iterable[tuple[Vertex, Vertex, float]],
    ) -> None:
        ids = tuple(str(v) for v in ids)
        if len(ids) < 2:
            raise SpaceValidationError("a space needs at least 2 vertices")
        if len(set(ids)) != len(ids):
            raise SpaceValidationError("vertex ids must be unique")
        self.ids = ids
        self._index = {v: i for i, v in enumerate(ids)}
        mu = np.asarray(measure, dtype=float)
        if mu.shape != (len(ids),):
            raise SpaceValidationError("one measure per vertex is required")
        if not np.all(np.isfinite(mu)) or np.any(mu <= 0):
            raise SpaceValidationError("vertex measures must be finite and > 0")
        mu.setflags(write=False)
        self.measure = mu

        self._edge_len: dict[tuple[int, int], float] = {}
        edge_list = []
        for u, v, length in edges:
            i, j = self.index(u), self.index(v)
            length = float(length)
            if i == j:
                raise SpaceValidationError(f"self-loop at {ids[i]!r}")
            if not np.isfinite(length) or length <= 0:
                raise SpaceValidationError(
                    f"edge {ids[i]!r}-{ids[j]!r} has nonpositive length {length}"
                )
            if (i, j) in self._edge_len:
                raise SpaceValidationError(f"duplicate edge {ids[i]!r}-{ids[j]!r}")
            self._edge_len[(i, j)] = self._edge_len[(j, i)] = length
            edge_list.append((min(i, j), max(i, j), length))
        self.edges = tuple(sorted(edge_list))

        adj: list[list[tuple[int, float]]] = [[] for _ in ids]
        for i, j, length in self.edges:
            adj[i].append((j, length))
            adj[j].append((i, length))
        self.adj = tuple(tuple(sorted(nb)) for nb in adj)

        dist = self._all_pairs()
        if not np.all(np.isfinite(dist)):
            raise SpaceValidationError("graph is not connected")
        dist.setflags(write=False)
        self.dist_matrix = dist

    def _all_pairs(self) -> np.ndarray:
        n = self.n
        if not self.edges:
            return np.full((n, n), np.inf)
        rows = [e[0] for e in self.edges]
        cols = [e[1] for e in self.edges]
        vals = [e[2] for e in self.edges]
        graph = csr_matrix((vals, (rows, cols)), shape=(n, n))
        return shortest_path(graph, method="D", directed=False)

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, v: Vertex) -> int:
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if 0 <= v < self.n:
                return int(v)
            raise KeyError(f"unknown vertex index {v}")
        try:
            return self._index[v]
        except KeyError:
            raise KeyError(f"unknown vertex {v!r}") from None

    def edge_length(self, u: Vertex, v: Vertex) -> float:
        i, j = self.index(u), self.index(v)
        try:
            return self._edge_len[(i, j)]
        except KeyError:
            raise KeyError(f"no edge {self.ids[i]!r}-{self.ids[j]!r}") from None

    def has_edge(self, i: int, j: int) -> bool:
        return (i, j) in self._edge_len

    @cached_property
    def balls(self) -> "BallTable":
        return BallTable(self)

    def to_dict(self) -> dict:
        return {
            "vertices": [
                {"id": v, "measure": float(m)} for v, m in zip(self.ids, self.measure)
            ],
            "edges": [
                {"u": self.ids[i], "v": self.ids[j], "length": length}
                for i, j, length in self.edges
            ],
        }

    def __repr__(self) -> str:
        return f"Space(n={self.n}, edges={len(self.edges)})"


class BallTable:
    """All distinct open balls of a space, one row per critical radius.

    Row ``b`` stands for the balls ``B(center[b], t)`` with
    ``lo[b] < t <= hi[b]``; they all have member set ``members[b]``.
    A row is admissible for the query "balls containing x with radius < r"
    iff ``members[b, x]`` and ``lo[b] < r``.
    """

    def __init__(self, space: Space) -> None:
        D = space.dist_matrix
        centers, lo, hi, rows = [], [], [], []
        for y in range(space.n):
            ds = np.unique(D[y])
            for j, dj in enumerate(ds):
                centers.append(y)
                lo.append(dj)
                hi.append(ds[j + 1] if j + 1 < len(ds) else np.inf)
                rows.append(D[y] <= dj)
        self.center = np.array(centers, dtype=np.int64)
        self.lo = np.array(lo)
        self.hi = np.array(hi)
        self.members = np.array(rows, dtype=bool)
        self.memberf = self.members.astype(float)
        self.mass = self.memberf @ space.measure
        self.measure = space.measure

    def __len__(self) -> int:
        return len(self.lo)

    def admissible(self, x: int, r: float) -> np.ndarray:
        return self.members[:, x] & (self.lo < r)

    def power_means(self, f: np.ndarray, p: float) -> np.ndarray:
        """Per-row average of ``|f|**p`` (no root taken)."""
        return self.memberf @ (np.abs(f) ** p * self.measure) / self.mass


@dataclass(frozen=True)
class Ball:
    center: int
    radius: float
    members: frozenset

    def __contains__(self, v: int) -> bool:
        return v in self.members


class DomainSet:
    """An open set ``omega`` with nonempty complement inside a space."""

    def __init__(self, space: Space, omega: Iterable[Vertex]) -> None:
        idx = frozenset(space.index(v) for v in omega)
        if not idx:
            raise SpaceValidationError("omega must be nonempty")
        if len(idx) == space.n:
            raise SpaceValidationError("omega must have a nonempty complement")
        self.space = space
        self.omega = idx
        self.complement = frozenset(range(space.n)) - idx
        mask = np.zeros(space.n, dtype=bool)
        mask[list(idx)] = True
        mask.setflags(write=False)
        self.mask = mask
        comp = sorted(self.complement)
        dc = space.dist_matrix[:, comp].min(axis=1)
        dc.setflags(write=False)
        self.dist_comp = dc

    @property
    def omega_sorted(self) -> list[int]:
        return sorted(self.omega)

    def to_dict(self) -> dict:
        return {"omega": [self.space.ids[i] for i in self.omega_sorted]}

    def __repr__(self) -> str:
        return f"DomainSet(|omega|={len(self.omega)}, |complement|={len(self.complement)})"


# --------------------------------------------------------------------------
# operations


def load_space(text: str) -> Space:
    """Parse the JSON space format ``{"vertices": [...], "edges": [...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpaceParseError(f"invalid JSON: {exc}") from exc
    try:
        verts = data["vertices"]
        edges = data["edges"]
        ids = [str(v["id"]) for v in verts]
        measure = [float(v["measure"]) for v in verts]
        edge_list = [(str(e["u"]), str(e["v"]), float(e["length"])) for e in edges]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpaceParseError(f"malformed space description: {exc!r}") from exc
    try:
        return Space(ids, measure, edge_list)
    except KeyError as exc:
        raise SpaceValidationError(str(exc)) from exc


def dump_space(space: Space) -> str:
    return json.dumps(space.to_dict(), indent=1)


def load_domain(space: Space, text: str) -> DomainSet:
    """Parse an omega file ``{"omega": [vertexId, ...]}``."""
    try:
        data = json.loads(text)
        ids = [str(v) for v in data["omega"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise SpaceParseError(f"malformed omega description: {exc!r}") from exc
    try:
        return DomainSet(space, ids)
    except KeyError as exc:
        raise SpaceValidationError(str(exc)) from exc


def dist(space: Space, x: Vertex, y: Vertex) -> float:
    return float(space.dist_matrix[space.index(x), space.index(y)])


def ball(space: Space, center: Vertex, radius: float) -> Ball:
    if not radius > 0:
        raise ValueError("radius must be positive")
    c = space.index(center)
    members = np.flatnonzero(space.dist_matrix[c] < radius)
    return Ball(c, float(radius), frozenset(int(v) for v in members))


def enumerate_distinct_balls(space: Space, containing: Vertex, max_radius: float) -> list[Ball]:
    """One representative ball per distinct member set of ``B(y, t) ∋ containing``, ``t < max_radius``.

    Representatives use the midpoint of the radius interval on which the
    member set is constant, clipped to ``max_radius``.
    """
    if not max_radius > 0:
        raise ValueError("max_radius must be positive")
    x = space.index(containing)
    table = space.balls
    seen: set[frozenset] = set()
    out: list[Ball] = []
    for b in np.flatnonzero(table.admissible(x, max_radius)):
        members = frozenset(int(v) for v in np.flatnonzero(table.members[b]))
        if members in seen:
            continue
        seen.add(members)
        top = min(table.hi[b], max_radius)
        out.append(Ball(int(table.center[b]), 0.5 * (table.lo[b] + top), members))
    return out


def doubling_constant(space: Space) -> float:
    """Least ``D`` with ``mu(B(x, 2r)) <= D mu(B(x, r))`` for all ``x`` and ``r > 0``.

    ``r -> mu(B(x, r))`` is left-continuous and constant on the intervals
    between consecutive distances, so the ratio is constant between the
    breakpoints ``{d(x, v)} ∪ {d(x, v) / 2}``; evaluating at every breakpoint
    (and at interval midpoints) covers all radii.
    """
    D = space.dist_matrix
    mu = space.measure
    best = 1.0
    for x in range(space.n):
        order = np.argsort(D[x], kind="stable")
        dx = D[x][order]
        cum = np.concatenate([[0.0], np.cumsum(mu[order])])
        pos = dx[dx > 0]
        crit = np.unique(np.concatenate([pos, 0.5 * pos]))
        mids = 0.5 * (crit[1:] + crit[:-1])
        radii = np.concatenate([crit, mids, [crit[-1] * 2 + 1.0]])
        m1 = cum[np.searchsorted(dx, radii, side="left")]
        m2 = cum[np.searchsorted(dx, 2.0 * radii, side="left")]
        best = max(best, float(np.max(m2 / m1)))
    return best


def dist_to_complement(domain: DomainSet, x: Vertex) -> float:
    i = domain.space.index(x)
    if i not in domain.omega:
        raise ValueError(f"vertex {domain.space.ids[i]!r} is not in omega")
    return float(domain.dist_comp[i])

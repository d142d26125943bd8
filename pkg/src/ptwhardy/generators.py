"""Example spaces: paths, cycles, grids and random connected graphs."""

from __future__ import annotations

from typing import Iterable, Sequence

from .rng import SplitMix64
from .space import DomainSet, Space

GEN_KINDS = ("path", "cycle", "grid", "grid-minus-set")
PATTERNS = ("center", "cross", "corner")


def path_space(n: int, lengths: Sequence[float] | None = None, measures: Sequence[float] | None = None) -> Space:
    if n < 2:
        raise ValueError("size must be >= 2")
    ids = [f"v{i}" for i in range(n)]
    lengths = lengths or [1.0] * (n - 1)
    measures = measures or [1.0] * n
    return Space(ids, measures, [(ids[i], ids[i + 1], lengths[i]) for i in range(n - 1)])


def cycle_space(n: int, lengths: Sequence[float] | None = None, measures: Sequence[float] | None = None) -> Space:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    ids = [f"v{i}" for i in range(n)]
    lengths = lengths or [1.0] * n
    measures = measures or [1.0] * n
    return Space(ids, measures, [(ids[i], ids[(i + 1) % n], lengths[i]) for i in range(n)])


def grid_id(r: int, c: int) -> str:
    return f"r{r:02d}c{c:02d}"


def grid_space(
    rows: int,
    cols: int,
    col_gaps: Sequence[float] | None = None,
    row_gaps: Sequence[float] | None = None,
    measure=None,
) -> Space:
    """Rectangular grid graph.

    ``col_gaps[j]`` is the length of the horizontal edges between columns
    ``j`` and ``j + 1`` (``row_gaps`` likewise); ``measure`` is a callable
    ``(r, c) -> float`` or ``None`` for unit measures.
    """
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError("grid needs at least 2 vertices")
    col_gaps = col_gaps or [1.0] * (cols - 1)
    row_gaps = row_gaps or [1.0] * (rows - 1)
    ids, mu, edges = [], [], []
    for r in range(rows):
        for c in range(cols):
            ids.append(grid_id(r, c))
            mu.append(1.0 if measure is None else float(measure(r, c)))
            if c + 1 < cols:
                edges.append((grid_id(r, c), grid_id(r, c + 1), col_gaps[c]))
            if r + 1 < rows:
                edges.append((grid_id(r, c), grid_id(r + 1, c), row_gaps[r]))
    return Space(ids, mu, edges)


def pattern_cells(rows: int, cols: int, pattern: str) -> list[tuple[int, int]]:
    cr, cc = rows // 2, cols // 2
    if pattern == "center":
        return [(cr, cc)]
    if pattern == "corner":
        return [(0, 0)]
    if pattern == "cross":
        arm = max(1, min(rows, cols) // 4)
        cells = {(cr, cc)}
        for k in range(1, arm + 1):
            cells |= {(cr + k, cc), (cr - k, cc), (cr, cc + k), (cr, cc - k)}
        return sorted(cells)
    raise ValueError(f"unknown pattern {pattern!r}")


def gen_space(
    kind: str,
    n: int | None = None,
    rows: int | None = None,
    cols: int | None = None,
    pattern: str = "center",
    cells: Iterable[tuple[int, int]] | None = None,
) -> tuple[Space, DomainSet]:
    """Build one of the example spaces together with a domain.

    The complement is the last vertex (path), ``v0`` (cycle), the last
    column (grid) or the given pattern (grid-minus-set).
    """
    if kind == "path":
        if n is None or n < 2:
            raise ValueError("path needs n >= 2")
        space = path_space(n)
        return space, DomainSet(space, space.ids[:-1])
    if kind == "cycle":
        if n is None or n < 3:
            raise ValueError("cycle needs n >= 3")
        space = cycle_space(n)
        return space, DomainSet(space, space.ids[1:])
    if kind in ("grid", "grid-minus-set"):
        if rows is None or cols is None or rows < 2 or cols < 2:
            raise ValueError("grids need rows, cols >= 2")
        space = grid_space(rows, cols)
        if kind == "grid":
            removed = {(r, cols - 1) for r in range(rows)}
        else:
            removed = set(cells) if cells is not None else set(pattern_cells(rows, cols, pattern))
        bad = {grid_id(r, c) for r, c in removed}
        return space, DomainSet(space, [v for v in space.ids if v not in bad])
    raise ValueError(f"unknown kind {kind!r}; expected one of {GEN_KINDS}")


def random_space(
    rng: SplitMix64,
    n: int,
    measure_range: tuple[float, float] = (0.5, 4.0),
    length_range: tuple[float, float] = (0.5, 2.0),
    extra_edge_prob: float = 0.3,
) -> Space:
    """Random connected graph: a random spanning tree plus independent extra edges."""
    ids = [f"x{i}" for i in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    pairs = set()
    for k in range(1, n):
        a, b = order[k], order[rng.randint(0, k - 1)]
        pairs.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in pairs and rng.random() < extra_edge_prob:
                pairs.add((a, b))
    edges = [(ids[a], ids[b], rng.uniform(*length_range)) for a, b in sorted(pairs)]
    mu = [rng.uniform(*measure_range) for _ in range(n)]
    return Space(ids, mu, edges)


def random_domain(rng: SplitMix64, space: Space) -> DomainSet:
    """Random omega with between one and ``n - 1`` complement vertices."""
    n = space.n
    k = rng.randint(1, max(1, n // 2))
    comp = set(rng.sample(range(n), k))
    return DomainSet(space, [i for i in range(n) if i not in comp])


def crack_grid(
    rows: int,
    cols: int,
    crack_col: int,
    gap: float = 0.05,
    crack_measure: float = 1e-3,
    base: float = 0.02,
):
    """Grid with a thin, light column ``crack_col`` and the last column removed.

    The crack's horizontal edges have length ``gap`` and its vertices carry
    mass ``crack_measure``, so a gradient candidate equal to 1 on the crack
    has a small maximal function almost everywhere but still blocks every
    straight curve.  Returns ``(space, domain, g, x)`` with ``g = base``
    off the crack, 1 on it, 0 on the complement, and ``x`` the middle of
    the first column.
    """
    if not (rows >= 2 and cols >= 3 and 1 <= crack_col <= cols - 2):
        raise ValueError("need rows >= 2, cols >= 3 and an interior crack column")
    col_gaps = [1.0] * (cols - 1)
    col_gaps[crack_col - 1] = gap
    col_gaps[crack_col] = gap
    space = grid_space(rows, cols, col_gaps=col_gaps, measure=lambda r, c: crack_measure if c == crack_col else 1.0)
    domain = DomainSet(space, [grid_id(r, c) for r in range(rows) for c in range(cols - 1)])
    g = [0.0] * space.n
    for r in range(rows):
        for c in range(cols):
            g[space.index(grid_id(r, c))] = 1.0 if c == crack_col else (0.0 if c == cols - 1 else base)
    return space, domain, g, space.index(grid_id(rows // 2, 0))

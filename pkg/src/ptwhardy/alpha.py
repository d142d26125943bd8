"""The alpha-function: worst normalized curve integral under a maximal-function budget.

For ``x`` in omega with ``d = d(x, omega^c)``, the feasible candidates are the
fields ``g`` with values in [0, 1] whose p-th power averages over every ball
``B ∋ x`` of radius ``< kappa d`` stay below ``tau^p``.  The pointwise value is

    alpha_x = max_g  min_{curves to omega^c of length <= nu d}  integral(g) / d

and ``alpha`` is the maximum over ``x``.  Each curve integral is linear in
``g`` and the constraint set is convex (``p >= 1``), so ``alpha_x`` is a
convex maximin problem.  :func:`alpha_optimize` solves it by cutting planes:
an inner solve over a finite set of active curves gives an upper estimate,
the exact minimal-integral search at the inner solution gives a certified
lower bound and, when it beats the inner value, a new active curve.

The objective is nondecreasing in ``g``, so vertices that lie in no
constrained ball are fixed at 1 in every solver and in the grid oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .certificate import Certificate, eps_num, holds
from .curves import (
    CurveFamilyQuery,
    InstanceTooLarge,
    PathRec,
    _budget,
    feasible_simple_paths,
    min_integral_path,
    path_coefficients,
)
from .maximal import as_field, check_gradient_field, maximal_at
from .space import DomainSet

BRUTE_MAX_VERTICES = 6
BRUTE_MAX_LEVELS = 5


@dataclass(frozen=True)
class AlphaQuery:
    nu: float
    kappa: float
    tau: float
    p: float
    x: object = None

    def __post_init__(self) -> None:
        if not self.nu > 1:
            raise ValueError("nu must exceed 1")
        if not self.kappa >= 1:
            raise ValueError("kappa must be >= 1")
        if not self.tau >= 0:
            raise ValueError("tau must be >= 0")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")


@dataclass
class AlphaEstimate:
    value: float
    witness_g: np.ndarray
    active_paths: list
    converged: bool
    gap: float
    x: int | None = None
    rounds: int = 0
    per_point: dict = field(default_factory=dict)

    @property
    def upper(self) -> float:
        return self.value + self.gap

    def to_dict(self, space) -> dict:
        return {
            "value": self.value,
            "gap": self.gap,
            "upper": self.upper,
            "converged": self.converged,
            "rounds": self.rounds,
            "x": None if self.x is None else space.ids[self.x],
            "witness_g": {v: float(w) for v, w in zip(space.ids, self.witness_g)},
            "active_paths": [p.to_dict(space) for p in self.active_paths],
        }


@dataclass
class _Problem:
    """Data of the maximin problem at one point ``x``."""

    domain: DomainSet
    x: int
    d: float
    query: CurveFamilyQuery
    free: np.ndarray  # indices of constrained vertices
    balls: np.ndarray  # (nb, len(free)) membership, unique rows
    mu: np.ndarray  # measure on free vertices
    cap: np.ndarray  # tau^p * mu(B)
    p: float
    tau: float

    def full(self, gfree: np.ndarray) -> np.ndarray:
        g = np.ones(self.domain.space.n)
        g[self.free] = gfree
        return g


def _problem(domain: DomainSet, x: int, nu: float, kappa: float, tau: float, p: float) -> _Problem:
    space = domain.space
    d = float(domain.dist_comp[x])
    table = space.balls
    rows = table.members[table.admissible(x, kappa * d)]
    rows = np.unique(rows, axis=0)
    union = rows.any(axis=0)
    free = np.flatnonzero(union)
    balls = rows[:, free]
    mass = rows.astype(float) @ space.measure
    return _Problem(
        domain=domain,
        x=x,
        d=d,
        query=CurveFamilyQuery(x, sorted(domain.complement), nu),
        free=free,
        balls=balls,
        mu=space.measure[free],
        cap=tau**p * mass,
        p=p,
        tau=tau,
    )


def feasible(domain: DomainSet, g: np.ndarray, x: int, kappa: float, tau: float, p: float) -> bool:
    """``g`` in [0, 1] with ``M_{p, kappa d(x)} g(x) <= tau`` (up to eps_num)."""
    g = np.asarray(g, dtype=float)
    if np.any(g < 0) or np.any(g > 1):
        return False
    d = float(domain.dist_comp[x])
    return holds(maximal_at(domain.space, g, p, x, kappa * d), tau)


# --------------------------------------------------------------------------
# inner solvers: maximize t subject to t <= C g + c0, g in the feasible set


def dual_bound(prob: _Problem, C: np.ndarray, c0: np.ndarray, y: np.ndarray, z: np.ndarray) -> float:
    """Weak-duality upper bound on ``max_g min_rows (C g + c0)``.

    For path weights ``y >= 0`` summing to 1 and ball multipliers ``z >= 0``
    the Lagrangian separates over vertices into ``max_{0<=g<=1} a g - w g^p``,
    which has a closed form, so every choice of multipliers gives a bound.
    """
    p = prob.p
    a = y @ C
    w = prob.mu * (z @ prob.balls.astype(float))
    if p == 1:
        best = np.maximum(a - w, 0.0)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(w > 0, (np.maximum(a, 0.0) / (p * np.where(w > 0, w, 1.0))) ** (1 / (p - 1)), 1.0)
        g = np.clip(np.where(a > 0, g, 0.0), 0.0, 1.0)
        best = a * g - w * g**p
    return float(y @ c0 + best.sum() + z @ prob.cap)


def _barrier_inner(prob: _Problem, C: np.ndarray, c0: np.ndarray, rel_gap: float = 1e-7):
    """Log-barrier interior-point method; returns ``(g_free, upper_bound)``.

    Damped Newton steps on ``-s t - sum(log slacks)`` in the variables
    ``(g, t)``, with ``s`` growing twentyfold per centering.  The upper bound
    comes from :func:`dual_bound` with the barrier multipliers, so it is valid
    however roughly the centering converged; iteration stops once it is
    within ``rel_gap * d`` of the primal value.
    """
    p, mu, cap, B = prob.p, prob.mu, prob.cap, prob.balls.astype(float)
    nf = len(prob.free)
    scale = max(prob.d, 1e-12)
    g = np.full(nf, 0.5 * min(prob.tau, 1.0))
    t = float(np.min(C @ g + c0)) - 0.5 * scale
    m = C.shape[0] + 2 * nf + B.shape[0]
    s = m / scale
    best_g, lower, upper = g.copy(), float(np.min(C @ g + c0)), np.inf

    def phi(g, t):
        sp = C @ g + c0 - t
        if sp.min() <= 0 or g.min() <= 0 or g.max() >= 1:
            return np.inf
        sb = cap - B @ (mu * g**p)
        if sb.min() <= 0:
            return np.inf
        return -s * t - np.log(sp).sum() - np.log(g).sum() - np.log1p(-g).sum() - np.log(sb).sum()

    for _ in range(40):
        for _ in range(60):
            sp = C @ g + c0 - t
            sb = cap - B @ (mu * g**p)
            hi = 1.0 - g
            J = B * (mu * p * g ** (p - 1))
            Cw = C / sp[:, None]
            Jw = J / sb[:, None]
            grad = np.empty(nf + 1)
            grad[:nf] = -Cw.sum(axis=0) - 1 / g + 1 / hi + Jw.sum(axis=0)
            grad[nf] = -s + np.sum(1 / sp)
            H = np.empty((nf + 1, nf + 1))
            diag = 1 / g**2 + 1 / hi**2
            if p != 1:
                diag = diag + (B.T @ (1 / sb)) * mu * p * (p - 1) * g ** (p - 2)
            H[:nf, :nf] = Cw.T @ Cw + Jw.T @ Jw + np.diag(diag)
            col = -(Cw.T @ (1 / sp))
            H[:nf, nf] = col
            H[nf, :nf] = col
            H[nf, nf] = np.sum(1 / sp**2)
            try:
                step = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, grad, rcond=None)[0]
            dec = float(-grad @ step)
            if dec / 2 <= 1e-9:
                break
            dg, dt = step[:nf], step[nf]
            # largest step keeping the linear slacks positive
            a = 1.0
            dsp = C @ dg - dt
            for sl, ds in ((sp, dsp), (g, dg), (hi, -dg)):
                neg = ds < 0
                if np.any(neg):
                    a = min(a, 0.99 * float(np.min(-sl[neg] / ds[neg])))
            f0 = phi(g, t)
            while a > 1e-12 and phi(g + a * dg, t + a * dt) > f0 - 0.25 * a * dec:
                a *= 0.5
            if a <= 1e-12:
                break
            g = g + a * dg
            t = t + a * dt
        sp = C @ g + c0 - t
        sb = cap - B @ (mu * g**p)
        y = 1 / sp
        z = (1 / sb) / y.sum()
        y = y / y.sum()
        upper = min(upper, dual_bound(prob, C, c0, y, z))
        val = float(np.min(C @ g + c0))
        if val > lower:
            lower, best_g = val, g.copy()
        if upper - lower <= rel_gap * scale:
            break
        s *= 20.0
    return best_g, max(upper, lower)


def _supergradient_inner(prob: _Problem, C: np.ndarray, c0: np.ndarray, iters: int = 500, c: float = 1.0, sweeps: int = 50):
    """Projected supergradient ascent on ``w = g^p`` with step ``c / sqrt(k)``.

    Projection clips to the unit box, then scales ``w`` down on each violated
    ball; scaling never raises another ball sum, so one sweep restores
    feasibility and later sweeps are no-ops.  The returned value is the best
    inner objective seen, an estimate rather than a bound.
    """
    p, mu, cap, B = prob.p, prob.mu, prob.cap, prob.balls.astype(float)
    w = np.full(len(prob.free), min(prob.tau, 1.0) ** p)

    def project(w):
        w = np.clip(w, 0.0, 1.0)
        for _ in range(sweeps):
            sums = B @ (mu * w)
            bad = np.flatnonzero(sums > cap * (1 + 1e-12))
            if len(bad) == 0:
                break
            for b in bad:
                tot = B[b] @ (mu * w)
                if tot > cap[b]:
                    w = np.where(B[b] > 0, w * (cap[b] / tot), w)
        return w

    w = project(w)
    best_g = w ** (1 / p)
    best = float(np.min(C @ best_g + c0))
    for k in range(1, iters + 1):
        g = w ** (1 / p)
        vals = C @ g + c0
        act = int(np.argmin(vals))
        sg = C[act] * (1 / p) * np.maximum(w, 1e-12) ** (1 / p - 1)
        norm = np.linalg.norm(sg)
        if norm == 0:
            break
        w = project(w + (c / np.sqrt(k)) * sg / norm)
        g = w ** (1 / p)
        val = float(np.min(C @ g + c0))
        if val > best:
            best, best_g = val, g
    return best_g, best


INNER_METHODS = {"barrier": _barrier_inner, "supergradient": _supergradient_inner}


def _closed_form(prob: _Problem, gfree: np.ndarray) -> AlphaEstimate:
    g = prob.full(gfree)
    path, val = min_integral_path(prob.domain.space, g, prob.query)
    return AlphaEstimate(val / prob.d, g, [path], True, 0.0, x=prob.x, rounds=0)


def _alpha_at(domain: DomainSet, x: int, query: AlphaQuery, tol: float, max_rounds: int, method: str) -> AlphaEstimate:
    prob = _problem(domain, x, query.nu, query.kappa, query.tau, query.p)
    space = domain.space
    nf = len(prob.free)
    if query.tau >= 1:
        return _closed_form(prob, np.ones(nf))
    if query.tau == 0:
        return _closed_form(prob, np.zeros(nf))

    inner = INNER_METHODS[method]
    geo, _ = min_integral_path(space, np.ones(space.n), prob.query)
    paths: list[PathRec] = [geo]
    coefs = [path_coefficients(space, geo)]
    fixed = np.ones(space.n, dtype=bool)
    fixed[prob.free] = False
    best_val, best_g = -np.inf, None
    upper = np.inf
    converged = False
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        Cfull = np.array(coefs)
        C = Cfull[:, prob.free]
        c0 = Cfull[:, fixed].sum(axis=1)
        gfree, inner_val = inner(prob, C, c0)
        if method == "barrier":
            upper = min(upper, inner_val)
        g = prob.full(gfree)
        path, val = min_integral_path(space, g, prob.query)
        if val > best_val:
            best_val, best_g = val, g
        if val >= inner_val - tol * prob.d:
            converged = True
            break
        if path in paths:
            break
        paths.append(path)
        coefs.append(path_coefficients(space, path))
    if method != "barrier":
        upper = max(inner_val, best_val)
    value = best_val / prob.d
    gap = max(0.0, upper / prob.d - value)
    return AlphaEstimate(value, best_g, paths, converged, gap, x=x, rounds=rounds)


def alpha_optimize(
    domain: DomainSet,
    query: AlphaQuery,
    tol: float = 1e-4,
    max_rounds: int = 100,
    method: str = "barrier",
) -> AlphaEstimate:
    """Cutting-plane estimate of alpha; ``value`` is a certified lower bound.

    ``gap`` bounds the distance to the cutting-plane upper bound.  ``tol``
    is absolute on the normalized value.  Without ``query.x`` every point of
    omega is solved independently and the best is returned.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if method not in INNER_METHODS:
        raise ValueError(f"unknown inner method {method!r}")
    space = domain.space
    if query.x is not None:
        x = space.index(query.x)
        if x not in domain.omega:
            raise ValueError(f"vertex {space.ids[x]!r} is not in omega")
        est = _alpha_at(domain, x, query, tol, max_rounds, method)
        est.per_point = {x: (est.value, est.upper)}
        return est
    ests = [_alpha_at(domain, x, query, tol, max_rounds, method) for x in domain.omega_sorted]
    best = max(ests, key=lambda e: e.value)
    top = max(e.upper for e in ests)
    return AlphaEstimate(
        value=best.value,
        witness_g=best.witness_g,
        active_paths=best.active_paths,
        converged=all(e.converged for e in ests),
        gap=max(0.0, top - best.value),
        x=best.x,
        rounds=max(e.rounds for e in ests),
        per_point={e.x: (e.value, e.upper) for e in ests},
    )


def verify_witness(domain: DomainSet, est: AlphaEstimate, query: AlphaQuery) -> bool:
    """Recompute feasibility and the value of an estimate's witness."""
    x = est.x
    g = est.witness_g
    if not feasible(domain, g, x, query.kappa, query.tau, query.p):
        return False
    d = float(domain.dist_comp[x])
    _, val = min_integral_path(domain.space, g, CurveFamilyQuery(x, sorted(domain.complement), query.nu))
    return abs(val / d - est.value) <= 1e-9 * max(1.0, est.value)


# --------------------------------------------------------------------------
# grid oracle


def _brute_at(domain: DomainSet, x: int, query: AlphaQuery, levels: int) -> tuple[float, np.ndarray]:
    space = domain.space
    prob = _problem(domain, x, query.nu, query.kappa, query.tau, query.p)
    comp = frozenset(domain.complement)
    limit, _ = _budget(space, x, comp, query.nu)
    coefs = [path_coefficients(space, PathRec(v, length)) for v, length in feasible_simple_paths(space, x, comp, limit)]
    Cfull = np.array(coefs)
    fixed = np.ones(space.n, dtype=bool)
    fixed[prob.free] = False
    C = Cfull[:, prob.free]
    c0 = Cfull[:, fixed].sum(axis=1)
    grid = np.arange(levels + 1) / levels
    G = np.array(list(itertools.product(grid, repeat=len(prob.free))))
    sums = (G**query.p * prob.mu) @ prob.balls.T.astype(float)
    mass = prob.balls.astype(float) @ prob.mu
    ok = np.all(sums <= prob.cap + eps_num() * mass, axis=1)
    G = G[ok]
    vals = (G @ C.T + c0).min(axis=1)
    k = int(np.argmax(vals))
    return float(vals[k]) / prob.d, prob.full(G[k])


def alpha_brute(domain: DomainSet, query: AlphaQuery, levels: int = 5) -> float:
    """Exhaustive search over ``g`` in ``{0, 1/levels, ..., 1}`` on tiny spaces.

    Vertices outside every constrained ball are fixed at 1, which loses
    nothing because the objective is nondecreasing in ``g``.
    """
    space = domain.space
    if space.n > BRUTE_MAX_VERTICES or levels > BRUTE_MAX_LEVELS or levels < 1:
        raise InstanceTooLarge(f"grid oracle needs <= {BRUTE_MAX_VERTICES} vertices and 1..{BRUTE_MAX_LEVELS} levels")
    if query.x is not None:
        xs = [space.index(query.x)]
        if xs[0] not in domain.omega:
            raise ValueError("x is not in omega")
    else:
        xs = domain.omega_sorted
    return max(_brute_at(domain, x, query, levels)[0] for x in xs)


# --------------------------------------------------------------------------
# structural checks


def alpha_rewrite_bound(domain: DomainSet, g, x, nu: float, kappa: float, p: float, tol: float = 1e-4) -> Certificate:
    """Check ``inf integral(g) <= d * alpha(nu, kappa, M_{p, kappa d} g(x))``.

    alpha is replaced by the optimizer's upper estimate at the same point,
    which is at most alpha itself.
    """
    space = domain.space
    g = as_field(space, g)
    check_gradient_field(g)
    xi = space.index(x)
    if xi not in domain.omega:
        raise ValueError("x is not in omega")
    d = float(domain.dist_comp[xi])
    tau = maximal_at(space, g, p, xi, kappa * d)
    _, lhs = min_integral_path(space, g, CurveFamilyQuery(xi, sorted(domain.complement), nu))
    est = alpha_optimize(domain, AlphaQuery(nu, kappa, tau, p, xi), tol=tol)
    rhs = d * est.upper
    return Certificate(
        kind="alpha_rewrite",
        lhs=lhs,
        rhs=rhs,
        passed=holds(lhs, rhs),
        constants={"tau": tau, "alpha_lower": est.value, "alpha_gap": est.gap, "d": d, "nu": nu, "kappa": kappa, "p": p},
        witnesses={"x": space.ids[xi]},
    )


def alpha_linear_criterion(
    domain: DomainSet,
    nu: float,
    kappa: float,
    p: float,
    C_alpha: float,
    tau_grid,
    tol: float = 1e-4,
    max_rounds: int = 100,
) -> Certificate:
    """Falsification test of ``alpha(tau) <= C_alpha * tau`` on a grid of ``tau``.

    A lower bound above ``C_alpha * tau`` refutes linear growth; passing is
    evidence only.
    """
    taus = list(tau_grid)
    if not taus:
        raise ValueError("tau_grid must be nonempty")
    rows = []
    worst = -np.inf
    for tau in taus:
        est = alpha_optimize(domain, AlphaQuery(nu, kappa, tau, p), tol=tol, max_rounds=max_rounds)
        excess = est.value - C_alpha * tau
        worst = max(worst, excess)
        rows.append({"tau": tau, "alpha_lower": est.value, "gap": est.gap, "margin": -excess, "converged": est.converged})
    return Certificate(
        kind="alpha_linear",
        lhs=worst,
        rhs=0.0,
        passed=holds(worst, 0.0, tol),
        constants={"C_alpha": C_alpha, "nu": nu, "kappa": kappa, "p": p},
        witnesses={"per_tau": rows},
        notes=["falsifier: lower bounds above C_alpha*tau refute; a pass is evidence only"],
    )

"""Pointwise Hardy inequality checks, the curve characterization and its constant.

Every check here is a sound falsifier but only sampled evidence for the
inequality: the definition quantifies over all Lipschitz ``u`` and all upper
gradients, which no finite test can exhaust.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificate import Certificate, eps_num, holds
from .curves import CurveFamilyQuery, inf_connection_potential, is_upper_gradient, min_integral_path
from .maximal import as_field, maximal_at
from .rng import SplitMix64
from .sampling import sample_gradient
from .space import DomainSet, Vertex

UPPER_GRADIENT_CHECK_MAX = 10


@dataclass(frozen=True)
class HardyParams:
    p: float
    C_H: float
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not (self.p >= 1 and self.C_H > 0 and self.kappa >= 1):
            raise ValueError("need p >= 1, C_H > 0, kappa >= 1")


@dataclass(frozen=True)
class HardyCharParams:
    p: float
    C_Gamma: float
    nu: float
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not (self.p >= 1 and self.C_Gamma > 0 and self.nu > 1 and self.kappa >= 1):
            raise ValueError("need p >= 1, C_Gamma > 0, nu > 1, kappa >= 1")


def _interior(domain: DomainSet, x: Vertex) -> int:
    i = domain.space.index(x)
    if i not in domain.omega:
        raise ValueError(f"vertex {domain.space.ids[i]!r} is not in omega")
    return i


def pointwise_hardy_check(domain: DomainSet, u, g, params: HardyParams, x: Vertex) -> Certificate:
    space = domain.space
    u = as_field(space, u)
    g = as_field(space, g)
    xi = _interior(domain, x)
    if np.any(np.abs(u[sorted(domain.complement)]) > eps_num()):
        raise ValueError("u must vanish on the complement")
    if np.any(g < 0):
        raise ValueError("g must be nonnegative")
    d = float(domain.dist_comp[xi])
    mg = maximal_at(space, g, params.p, xi, params.kappa * d)
    lhs = abs(float(u[xi]))
    rhs = params.C_H * d * mg
    notes = ["sampled: a pass is evidence, not proof"]
    if space.n <= UPPER_GRADIENT_CHECK_MAX:
        notes.append("upper-gradient: verified" if is_upper_gradient(space, u, g) else "upper-gradient: VIOLATED")
    else:
        notes.append("upper-gradient: asserted")
    return Certificate(
        kind="pointwise_hardy",
        lhs=lhs,
        rhs=rhs,
        passed=holds(lhs, rhs),
        constants={"p": params.p, "C_H": params.C_H, "kappa": params.kappa, "d": d, "maximal": mg},
        witnesses={"x": space.ids[xi]},
        notes=notes,
    )


def _char_parts(domain: DomainSet, g: np.ndarray, xi: int, p: float, nu: float, kappa: float):
    space = domain.space
    d = float(domain.dist_comp[xi])
    path, value = min_integral_path(space, g, CurveFamilyQuery(xi, sorted(domain.complement), nu))
    mg = maximal_at(space, g, p, xi, kappa * d)
    return path, value, d, mg


def hardy_curve_char(domain: DomainSet, g, params: HardyCharParams, x: Vertex) -> Certificate:
    space = domain.space
    g = as_field(space, g)
    if np.any(g < 0):
        raise ValueError("g must be nonnegative")
    xi = _interior(domain, x)
    path, value, d, mg = _char_parts(domain, g, xi, params.p, params.nu, params.kappa)
    rhs = params.C_Gamma * d * mg
    return Certificate(
        kind="hardy_curve_char",
        lhs=value,
        rhs=rhs,
        passed=holds(value, rhs),
        constants={"p": params.p, "C_Gamma": params.C_Gamma, "nu": params.nu, "kappa": params.kappa, "d": d, "maximal": mg},
        witnesses={"x": space.ids[xi], "path": path.to_dict(space, value)},
        notes=["sampled: a pass is evidence, not proof"],
    )


def hardy_char_restricted(domain: DomainSet, g, params: HardyCharParams, x: Vertex) -> Certificate:
    """Curve characterization for test functions that vanish off omega."""
    g = as_field(domain.space, g)
    if np.any(np.abs(g[sorted(domain.complement)]) > 0):
        raise ValueError("g must vanish on the complement")
    cert = hardy_curve_char(domain, g, params, x)
    cert.kind = "hardy_char_restricted"
    return cert


def hardy_ratio(domain: DomainSet, g, xi: int, p: float, nu: float, kappa: float) -> float:
    """``inf integral / (d * M g(x))`` with ``0/0 -> 0``."""
    _, value, d, mg = _char_parts(domain, g, xi, p, nu, kappa)
    if mg * d <= 0:
        return 0.0 if value <= eps_num() else float("inf")
    return value / (d * mg)


def sample_hardy_fields(domain: DomainSet, trials: int, seed: int) -> list[np.ndarray]:
    """The deterministic sample of gradient candidates used by :func:`estimate_CH`.

    Candidates vanish on the complement.  A discrete curve charges half of
    its last edge to the terminal complement vertex, which no ball of radius
    below ``kappa d`` sees, so unrestricted candidates give infinite ratios.
    """
    rng = SplitMix64(seed)
    space = domain.space
    omega = domain.omega_sorted
    comp = sorted(domain.complement)
    fields = []
    for t in range(trials):
        x = omega[rng.randint(0, len(omega) - 1)]
        g = sample_gradient(rng, space, t, x, comp)
        g[comp] = 0.0
        fields.append(g)
    return fields


def estimate_CH(
    domain: DomainSet,
    p: float,
    nu: float,
    kappa: float,
    trials: int,
    seed: int,
    fields: list | None = None,
) -> float:
    """Largest sampled characterization ratio over candidates and all ``x`` in omega.

    The converse direction of the characterization turns this into the
    pointwise constant ``C_H``; it is a lower bound for the true supremum.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if fields is None:
        fields = sample_hardy_fields(domain, trials, seed)
    best = 0.0
    for g in fields:
        for xi in domain.omega_sorted:
            best = max(best, hardy_ratio(domain, g, xi, p, nu, kappa))
    return float(best)


def forward_test_function(domain: DomainSet, g, x: Vertex, kappa: float, p: float, delta: float) -> np.ndarray:
    """Potential of ``h = g + M_{p, kappa d(x)} g(x) + delta`` relative to the complement.

    ``h`` is an upper gradient of the returned ``u``, ``u`` vanishes on the
    complement and ``u(x) >= delta * d(x, complement)``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    space = domain.space
    g = as_field(space, g)
    if np.any(g < 0):
        raise ValueError("g must be nonnegative")
    xi = _interior(domain, x)
    d = float(domain.dist_comp[xi])
    h = g + maximal_at(space, g, p, xi, kappa * d) + delta
    return inf_connection_potential(space, h, domain)


def forward_gradient(domain: DomainSet, g, x: Vertex, kappa: float, p: float, delta: float) -> np.ndarray:
    """The field ``h`` whose potential :func:`forward_test_function` returns."""
    space = domain.space
    g = as_field(space, g)
    xi = _interior(domain, x)
    d = float(domain.dist_comp[xi])
    return g + maximal_at(space, g, p, xi, kappa * d) + delta


def hardy_rows(domain: DomainSet, g, params: HardyCharParams) -> list[dict]:
    rows = []
    space = domain.space
    for xi in domain.omega_sorted:
        cert = hardy_curve_char(domain, g, params, xi)
        denom = cert.constants["d"] * cert.constants["maximal"]
        ratio = cert.lhs / denom if denom > 0 else (0.0 if cert.lhs <= eps_num() else float("inf"))
        rows.append(
            {
                "x": space.ids[xi],
                "d": cert.constants["d"],
                "lhs": cert.lhs,
                "rhs": cert.rhs,
                "ratio": ratio,
                "witness_length": cert.witnesses["path"]["length"],
                "pass": cert.passed,
            }
        )
    return rows

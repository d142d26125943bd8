"""Cheapest budgeted curves and the curve form of the pointwise Hardy inequality.

Run:  python demos/02_curves_and_hardy.py
"""

import numpy as np

from ptwhardy.curves import CurveFamilyQuery, inf_connection_potential, is_upper_gradient, min_integral_path
from ptwhardy.generators import gen_space, grid_id
from ptwhardy.hardy import (
    HardyCharParams,
    HardyParams,
    estimate_CH,
    forward_gradient,
    forward_test_function,
    hardy_curve_char,
    pointwise_hardy_check,
)

space, dom = gen_space("grid", rows=5, cols=6)  # complement: last column
x = grid_id(2, 0)
print("x =", x, " d(x, complement) =", dom.dist_comp[space.index(x)])

# A wall of g = 1 in column 2 with a cheap door at the top.  With a tight
# length budget the curve has to cross the wall; a looser one walks round.
g = np.zeros(space.n)
for r in range(5):
    g[space.index(grid_id(r, 2))] = 1.0
g[space.index(grid_id(0, 2))] = 0.1
for nu in (1.2, 1.5, 2.0):
    path, val = min_integral_path(space, g, CurveFamilyQuery(x, sorted(dom.complement), nu))
    print(f"nu = {nu}: integral {val:.3f}, length {path.length}, via {[space.ids[v] for v in path.vertices]}")

# The cheapest curve to the complement is a potential with g as upper gradient.
u = inf_connection_potential(space, g, dom)
print("potential is an upper-gradient pair:", is_upper_gradient(space, u, g))

cert = hardy_curve_char(dom, g, HardyCharParams(p=2.0, C_Gamma=1.0, nu=2.0), x)
print(f"curve form at x: {cert.lhs:.3f} <= {cert.rhs:.3f} ? {cert.passed}")

# The converse construction: from g build u with u(x) >= delta d and check
# the pointwise inequality with the sampled constant.
C_H = estimate_CH(dom, 2.0, 2.0, 1.0, trials=32, seed=0)
print("sampled C_H (a lower bound on the true constant):", round(C_H, 4))
u = forward_test_function(dom, g, x, 1.0, 2.0, 0.5)
h = forward_gradient(dom, g, x, 1.0, 2.0, 0.5)
for p in (2.0, 2.5, 3.0):
    c = pointwise_hardy_check(dom, u, h, HardyParams(p, max(C_H, 1.0)), x)
    print(f"pointwise Hardy at p = {p}: |u(x)| = {c.lhs:.3f} <= {c.rhs:.3f}: {c.passed}")

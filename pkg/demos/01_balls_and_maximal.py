"""Balls, doubling and the restricted maximal function on small graphs.

Run:  python demos/01_balls_and_maximal.py
"""

import numpy as np

from ptwhardy.generators import gen_space, grid_id, path_space
from ptwhardy.maximal import maximal_all, weak_type_check
from ptwhardy.space import Space, doubling_constant, enumerate_distinct_balls

# A weighted three-vertex path.  Balls are open, so B(b, 1) = {b} while
# B(b, 1.5) is everything; the heavy end makes the doubling constant 10.
s = Space(["a", "b", "c"], [1, 1, 8], [("a", "b", 1), ("b", "c", 1)])
print("doubling constant of a-b-c with masses (1, 1, 8):", doubling_constant(s))
print("distinct balls containing b with radius < 1.5:")
for b in enumerate_distinct_balls(s, "b", 1.5):
    print("   ", sorted(s.ids[i] for i in b.members), "center", s.ids[b.center], "radius", round(b.radius, 3))

# The maximal function only sees balls of radius below r, so a spike is
# felt more weakly (or not at all) from far away.
p5 = path_space(5)
spike = np.zeros(5)
spike[2] = 1.0
for r in (0.5, 1.5, 2.5, 10.0):
    print(f"M_(1,{r}) of a spike on a 5-path:", np.round(maximal_all(p5, spike, 1.0, r), 3))

# Larger p weights the peak more.
for p in (1.0, 2.0, 4.0):
    print(f"M_({p},2.5) spike:", np.round(maximal_all(p5, spike, p, 2.5), 3))

# Scale-invariant weak-type estimate on the 9x9 grid with a cross removed.
space, dom = gen_space("grid-minus-set", rows=9, cols=9, pattern="cross")
D = doubling_constant(space)
print("9x9 grid minus cross: D =", D)
rng = np.random.default_rng(0)
f = rng.uniform(0, 1, space.n)
cert = weak_type_check(space, f, q=2.0, r=2.0, s=1.0, lam=0.6, x=grid_id(0, 0), D=D)
print(f"weak type at the corner: lhs {cert.lhs:.3f} <= rhs {cert.rhs:.3g}: {cert.passed}")

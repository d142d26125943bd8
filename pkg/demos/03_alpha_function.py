"""The alpha-function: how much a small maximal function can still block curves.

Run:  python demos/03_alpha_function.py
"""

import time

from ptwhardy.alpha import AlphaQuery, alpha_brute, alpha_optimize, verify_witness
from ptwhardy.generators import gen_space, path_space
from ptwhardy.space import DomainSet

space, dom = gen_space("grid-minus-set", rows=5, cols=5, pattern="center")

# With kappa = 1 a neighbour of the removed center only sees the ball made of
# itself, so the removed vertex is unconstrained and the last half edge of
# every curve costs 1/2: alpha(0) = 1/2.  With kappa = 4 the balls reach the
# complement and alpha grows linearly from 0.
for nu, kappa in ((2.0, 1.0), (6.0, 4.0)):
    print(f"5x5 grid minus its center, nu = {nu}, kappa = {kappa}, p = 2")
    print(" tau   lower     upper     rounds  time")
    for tau in (0.0, 0.1, 0.2, 0.5, 1.0):
        t0 = time.perf_counter()
        est = alpha_optimize(dom, AlphaQuery(nu, kappa, tau, 2.0))
        print(f"{tau:4.1f}  {est.value:.6f}  {est.upper:.6f}  {est.rounds:5d}  {time.perf_counter() - t0:5.1f}s")

# The default inner solver is a log-barrier Newton method with a duality
# certificate; the projected supergradient method is kept for comparison.
q = AlphaQuery(2.0, 1.0, 0.1, 2.0, "r00c00")
for method in ("barrier", "supergradient"):
    est = alpha_optimize(dom, q, method=method)
    print(f"{method:13s} at r00c00, tau 0.1: {est.value:.5f} (witness re-verified: {verify_witness(dom, est, q)})")

# The grid oracle only sees values in {0, 1/5, ..., 1}; on one edge alpha
# equals min(tau, 1) but the oracle rounds tau = 0.25 down to 0.2.
two = DomainSet(path_space(2), ["v0"])
for tau in (0.25, 0.5):
    qq = AlphaQuery(2.0, 2.0, tau, 1.0)
    print(f"single edge, tau {tau}: optimizer {alpha_optimize(two, qq).value:.4f}, grid oracle {alpha_brute(two, qq):.4f}")

"""
Threshold of the one-loop bubble
================================

Momentum routing, the Symanzik polynomial, and the normal threshold
-p^2 = (m1 + m2)^2 found as a point of the Landau surface.
"""

import numpy as np

from quadlandau.fixtures import bubble, bubble_graph
from quadlandau.graph import build_routing, omega, symanzik_first
from quadlandau.landau import LandauError, Witness, generate_landau_system, is_physical
from quadlandau.solver import SolveConfig, membership_test, physical_slice_search, verify_witness

g = bubble_graph()
r = build_routing(g)
for e in g.edges:
    print(f"edge {e.id}: q = {r.label(e.id)}")
print("U =", symanzik_first(g))
print("omega =", omega(g, [e.id for e in g.edges]), "(logarithmic in D = 4)")

# %%
# Minkowski momenta are written (i x0, x1, x2, x3) so that p^2 = -x0^2 + |x|^2.
# At rest, p = (iE, 0, 0, 0) and the threshold sits at E = m1 + m2 = 3; the
# pseudo-threshold E = |m1 - m2| = 1 is on the surface too.
sys = generate_landau_system(bubble(), "finite")
cfg = SolveConfig(seed=1, starts=6)
for E in np.arange(0.5, 4.01, 0.5):
    point = {"p_0": 1j * E, "p_1": 0, "p_2": 0, "p_3": 0, "m1": 1, "m2": 2}
    rep = membership_test(sys, point, cfg)
    phys = [w for w in rep.witnesses if is_physical(sys, w)]
    print(f"E = {E:.1f}: {rep.verdict:17s} physical witnesses: {len(phys)}")

# %%
# The threshold configuration by hand: alpha = (2/3, 1/3), k = (i, 0, 0, 0).
w = Witness((2 / 3, 1 / 3), (1, 1j, 0, 0, 0), (3j, 0, 0, 0, 1, 2), float("nan"), "{1,2}", "finite")
rep = verify_witness(sys, w)
print("hand witness residual", rep["residual"], "physical", is_physical(sys, w))

# %%
# Second-type points live at u = 0.  With real Minkowski momenta they only
# appear when p is lightlike.  A spacelike p is outside the physical region
# altogether and the search refuses it.
inf = generate_landau_system(bubble(), "infinity")
for label, p in [("lightlike", (2j, 2, 0, 0)), ("timelike", (3j, 0, 0, 0)), ("spacelike", (1j, 2, 0, 0))]:
    point = dict(zip(["p_0", "p_1", "p_2", "p_3"], p), m1=1, m2=2)
    try:
        found = physical_slice_search(inf, point, seed=0)
    except LandauError as exc:
        print(f"{label:9s}: {exc}")
        continue
    print(f"{label:9s}: {len(found)} real solution(s) at infinity")

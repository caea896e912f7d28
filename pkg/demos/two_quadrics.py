"""
Landau surface of a pair of quadrics
====================================

Two quadratic forms in three projective coordinates, one parameter t.
We write down the Landau equations, probe a few points, and sweep the
real line.
"""

import cmath

import numpy as np

from quadlandau.fixtures import two_quadrics
from quadlandau.landau import enumerate_branches, generate_landau_system
from quadlandau.solver import SolveConfig, format_scan_table, membership_test, scan

I = two_quadrics()
for q in I.polynomials():
    print("Q =", q)

# The finite chart pins u = 1 and keeps the u-gradient row aside; it follows
# from the others on every solution.
sys = generate_landau_system(I, "finite")
for i, rows in enumerate(sys.gradients, start=1):
    print(f"gradient rows of Q{i}:", ", ".join(map(str, rows)))

# Each non-empty support of alpha is its own square system.
for b in enumerate_branches(sys, seed=0):
    print("branch", b.id, "unknowns", len(b.unknowns), "equations", len(b.full_equations()))

# %%
# Points we expect on the surface: t = 0, t = +-2 and the roots of 2t^2 = 1 +- i.
cfg = SolveConfig(seed=0)
expected = [0, 2, -2] + [s * cmath.sqrt((1 + e * 1j) / 2) for s in (1, -1) for e in (1, -1)]
for t in expected + [1, 1.5j]:
    rep = membership_test(sys, {"t": t}, cfg)
    where = f"branch {rep.witness.branch}, residual {rep.witness.residual:.1e}" if rep.witness else ""
    print(f"t = {complex(t):.4f}: {rep.verdict} {where}")

# %%
# A sweep of the real line in steps of 1/4 picks out -2, 0 and 2.
grid = [{"t": t} for t in np.arange(-3, 3.25, 0.25)]
reports = scan(sys, grid, cfg)
print(format_scan_table(sys, [r for r in reports if r.member]))

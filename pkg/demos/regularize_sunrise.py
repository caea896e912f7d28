"""
Regulating the sunrise
======================

Each propagator of the two-loop sunrise is a quadratic form in (u, k1, k2)
that is degenerate: it does not see one of the loop momenta.  We
diagonalize each family with a polynomial basis and add eps * A on the
null directions.
"""

from fractions import Fraction

from quadlandau.fixtures import sunrise
from quadlandau.quadform import classify_point, principal_minor_test
from quadlandau.regularize import regularize_integral

I = sunrise()
point = {f"p_{mu}": v for mu, v in enumerate([1, 2, 0, 1])}
point.update(m1=1, m2=2, m3=3)
verdict, notes = classify_point(I.forms, point)
print("at the chosen real point the integral is", verdict)

out, regs = regularize_integral(I, point)
for i, reg in enumerate(regs, start=1):
    d = reg.diagonalization
    print(f"form {i}: nonzero diagonal entries {reg.rank_profile} of {d.n}, regulated slots {list(reg.regulated)}")

# %%
# After regularization every form is positive definite, for every eps > 0;
# here we check three values by exact leading-minor tests.
for eps in (Fraction(1, 10), 1, 10):
    full = dict(point, eps=eps)
    ok = []
    for f in out.forms:
        A = [[x.constant_value() for x in row] for row in f.M.subs(full).entries]
        ok.append(principal_minor_test(A)[0])
    print(f"eps = {eps}: positive definite {ok}, classification {classify_point(out.forms, full)[0]}")

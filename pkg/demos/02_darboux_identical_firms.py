"""
Darboux polynomials for identical firms
=======================================

Linear Darboux polynomials, the integrals built from them, and what the
exact search finds at higher degree.
"""

from fractions import Fraction

import numpy as np

from oligodyn import ReducedModel, integrate, search_darboux, synthesize_integrals, verify_conservation
from oligodyn.dynamics import random_initial_states

m = ReducedModel.identical(3, Fraction(8), Fraction(2))

# %% degree one: coordinates plus the three differences
for d in search_darboux(m, 1):
    print(f"F = {str(d.F):<10} P = {d.P}")

# %% integrals
integrals = synthesize_integrals(m, search_darboux(m, 1))
for I in integrals[:3]:
    print(I)
static = [I for I in integrals if I.P0 == 0]
print("time independent:", static[0])

# %% degree three
# With eps = 2 the search turns up four irreducible cubics on top of the
# linear ones.  Raising eps (quadratic costs) removes them.
for eps in (2, 3):
    found = search_darboux(ReducedModel.identical(3, Fraction(8), Fraction(eps)), 3)
    cubics = [d for d in found if d.degree == 3]
    print(f"eps = {eps}: {len(found)} polynomials, {len(cubics)} cubic")
    for d in cubics:
        print("   ", d.F, "|", d.P)

# %% conservation along trajectories
# f = 1 keeps q_i - q_j well above round-off over t in [0, 20]
slow = ReducedModel.identical(3, Fraction(1), Fraction(2))
I1 = [I for I in synthesize_integrals(slow, search_darboux(slow, 1)) if I.P0 == 0][0]
drift = [verify_conservation(integrate(slow, q0, 20.0, tol=1e-11), I1).max_relative_drift
         for q0 in random_initial_states(slow, 10, seed=1)]
print("max relative drift of", I1.name, "=", f"{max(drift):.2e}")
print("mean:", np.mean(drift))

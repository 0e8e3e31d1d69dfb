"""
Three identical firms with linear costs
=======================================

Equilibria, their stability and a Lyapunov certificate on a duopoly plane.
"""

from pathlib import Path

import numpy as np

from oligodyn import (analyze_point, enumerate_critical_points, load_model, lyapunov_duopoly,
                      poincare_obstruction, reduce)
from oligodyn.equilibria import find_point

HERE = Path(__file__).resolve().parent

# a = 10, b = 1, d = 2, e = 0, so every firm has f = 8 and eps = 2
raw = load_model(HERE / "models" / "symmetric.json")
m = reduce(raw)
print("f   =", [str(x) for x in m.f])
print("eps =", [str(x) for x in m.eps])
print("det(beta) =", m.det_beta())

# %% all 2^3 supports
points = enumerate_critical_points(m)
for pt in points:
    print(f"{pt.e_label(3):>3}  {pt.label:<16} q = {tuple(str(x) for x in pt.q)}")

# %% the interior point
rep = analyze_point(m, points[-1])
print("charpoly:", [str(c) for c in rep.charpoly])
print("eigenvalues:", np.round(np.real(rep.eigenvalues), 12))
print("Routh-Hurwitz:", rep.routh_hurwitz_pass, "->", rep.classification)

# a monopoly point is a saddle; the origin repels in every direction
for label in ("E1", "E2"):
    r = analyze_point(m, find_point(points, label, 3))
    print(label, r.classification, np.round(np.real(r.eigenvalues), 6))

# same-sign eigenvalues at the origin rule out an analytic integral there
print("origin:", poincare_obstruction(analyze_point(m, points[0]).eigenvalues))

# %% quadratic Lyapunov function on the q3 = 0 plane
cert = lyapunov_duopoly(m, find_point(points, "E5", 3))
K = np.array(cert.K, dtype=float)
A = np.array(cert.A, dtype=float)
print("K =\n", K)
print("A^T K + K A =\n", A.T @ K + K @ A)
print(f"dV/dt < 0 for 0 < |x| <= {cert.sampled_negativity_radius:.3f} "
      f"(max sampled {cert.max_sampled_vdot:.2e})")

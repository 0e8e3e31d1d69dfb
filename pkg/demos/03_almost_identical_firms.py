"""
Almost identical firms
======================

Different quadratic cost terms, equal everything else: the family of
linear Darboux polynomials, convergence to the central line, the planar
reduction on a leaf and a level-set mesh.
"""

from pathlib import Path

import numpy as np

from oligodyn import load_model, n_firm_family, reduce, search_darboux, verify_attraction
from oligodyn.dynamics import leaf_integral, lift_project_deviation, line_dynamics
from oligodyn.levelset import export_levelset

HERE = Path(__file__).resolve().parent
m = reduce(load_model(HERE / "models" / "almost_identical.json"))
print("eps =", [str(e) for e in m.eps], " det(beta) =", m.det_beta())

# %% pairs F_ij and the common P0
fam = n_firm_family(m)
for (i, j), d, I in fam.pairs:
    print(f"F{i + 1}{j + 1} = {d.F}")
    print("     gamma =", [str(g) for g in I.gamma])
print("P0 =", fam.P0, "(closed form", fam.P0_closed, ")")
print("independent ratios:", [r.name for r in fam.ratios])

# %% every F_ij decays like exp(P0 t), so orbits approach the line through E8
att = verify_attraction(m, search_darboux(m, 1), trials=100)
print(f"{att.passed}/{att.trials} trials reach E8, worst decay {att.worst_decay:.1e}")

line = line_dynamics(m, q40=0.05)
print("q4* =", line.q4_star, " matches E8:", line.matched)
t, q4 = line.samples
print("logistic fit error:", np.abs(q4 - line.closed_form(t, 0.05)).max())

# %% planar reduction on the leaf through q0
q0 = np.array([0.4, 0.9, 1.3])
print("I1(q0) =", leaf_integral(m).evaluate(q0))
print("lift vs 3-D integration:", lift_project_deviation(m, q0))

# %% the leaf itself as a triangle mesh
mesh = export_levelset(m, leaf_integral(m), float(leaf_integral(m).evaluate(q0)), grid=48)
print(len(mesh.vertices), "vertices,", len(mesh.faces), "triangles")

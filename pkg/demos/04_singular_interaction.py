"""
Singular interaction matrix
===========================

With e_i = -2b every eps_i equals -2 and beta has the left null vector
(1, 1, 1).  The product of the outputs is then conserved whenever the
f_i sum to zero.
"""

from pathlib import Path

import numpy as np

from oligodyn import integrate, load_model, reduce, singular_beta_integral, verify_conservation
from oligodyn.integrals import growth_rate_residual, left_null_vectors

HERE = Path(__file__).resolve().parent
m = reduce(load_model(HERE / "models" / "singular_beta.json"))
print("f =", [str(x) for x in m.f], " eps =", [str(x) for x in m.eps], " det =", m.det_beta())
print("left null vectors:", [tuple(str(x) for x in v) for v in left_null_vectors(m)])

(J,) = singular_beta_integral(m)
print(J.name, "=", J.description, " P0 =", J.P0)

# trajectories leave every bounded set quickly, so keep the window short
rng = np.random.default_rng(0)
for q0 in rng.uniform(0.1, 1.0, (5, 3)):
    traj = integrate(m, q0, 0.3, tol=1e-11)
    rep = verify_conservation(traj, J)
    res = growth_rate_residual(m, J.gamma, traj.states).max()
    print(f"q0 = {np.round(q0, 3)}  drift {rep.max_relative_drift:.1e}  growth residual {res:.1e}")

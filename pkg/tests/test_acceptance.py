"""Acceptance criteria, one test each, with a PASS/FAIL summary line per criterion."""

import time
from fractions import Fraction as Fr

import numpy as np
import pytest

from oligodyn import exact
from oligodyn.darboux import coordinate_cofactor, darboux_residual, search_darboux
from oligodyn.dynamics import (integrate, leaf_integral, lift_project_deviation,
                               random_initial_states, verify_attraction, verify_conservation)
from oligodyn.equilibria import enumerate_critical_points, find_point
from oligodyn.integrals import (almost_identical_P0, almost_identical_gamma, decompose_cofactor,
                                family_poly, growth_rate_residual, singular_beta_integral,
                                synthesize_integrals)
from oligodyn.model import OligopolyModel, ReducedModel, reduce
from oligodyn.poly import MultiPoly
from oligodyn.stability import (analyze_point, characteristic_and_eigenvalues, jacobian_at,
                                lyapunov_duopoly, poincare_at, routh_hurwitz)


@pytest.fixture
def report(capsys):
    def line(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}")
        return ok
    return line


def var(i):
    return MultiPoly.var(3, i)


def test_criterion_1_symmetric_equilibrium(report):
    t0 = time.perf_counter()
    m = reduce(OligopolyModel.identical(3, a=Fr(10), b=Fr(1), c=Fr(1), d=Fr(2), e=Fr(0)))
    pt = find_point(enumerate_critical_points(m), "E8", 3)
    rep = analyze_point(m, pt)
    abar = 8
    elapsed = time.perf_counter() - t0
    eig_err = float(np.abs(np.sort_complex(np.array(rep.eigenvalues)) - np.array([-8, -2, -2])).max())
    ok = (pt.q == (2, 2, 2)
          and rep.charpoly == [1, 12, 36, 32]
          and rep.charpoly[1:] == [Fr(3, 2) * abar, Fr(9, 16) * abar**2, Fr(1, 16) * abar**3]
          and eig_err <= 1e-10
          and rep.routh_hurwitz_pass
          and rep.classification == "stable node"
          and elapsed < 1.0)
    report("1", ok, f"E8={tuple(map(str, pt.q))}, charpoly={[str(c) for c in rep.charpoly]}, eig err {eig_err:.1e}, "
                    f"{rep.classification}, {elapsed:.3f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="linear-cost identical firms carry irreducible cubic Darboux polynomials")
def test_criterion_2_identical_darboux_search(report):
    # the printed cofactors f - 2q1 - 2q2 - q3 pin eps = 2, i.e. linear cost
    m = ReducedModel.identical(3, Fr(8), Fr(2))
    t0 = time.perf_counter()
    found = search_darboux(m, 3)
    elapsed = time.perf_counter() - t0
    f = Fr(8)
    expected = [
        (var(0), None), (var(1), None), (var(2), None),
        (var(0) - var(1), MultiPoly.linear((-2, -2, -1), f)),
        (var(1) - var(2), MultiPoly.linear((-1, -2, -2), f)),
        (var(0) - var(2), MultiPoly.linear((-2, -1, -2), f)),
    ]
    linear_ok = [(d.F, d.P) for d in found[:6]] == [
        (F, P if P is not None else coordinate_cofactor(m, i)) for i, (F, P) in enumerate(expected)]
    identities = all(darboux_residual(m, d.F, d.P).is_zero() for d in found)
    higher = [d for d in found if d.degree > 1]
    ok = linear_ok and identities and not higher and elapsed < 10
    report("2", ok, f"linear set as printed: {linear_ok}, identities exact: {identities}, "
                    f"{len(higher)} irreducible polynomials of degree 2-3 "
                    f"(cofactors {sorted(str(d.P) for d in higher)}), {elapsed:.2f}s")
    assert ok


def test_criterion_2_supplement_quadratic_cost(report):
    # same structure with eps != 2: only coordinates and differences survive to degree 3
    m = ReducedModel.identical(3, Fr(8), Fr(3))
    t0 = time.perf_counter()
    found = search_darboux(m, 3)
    elapsed = time.perf_counter() - t0
    texts = [str(d.F) for d in found]
    identities = all(darboux_residual(m, d.F, d.P).is_zero() for d in found)
    ok = texts == ["q1", "q2", "q3", "q1 - q2", "q2 - q3", "q1 - q3"] and identities and elapsed < 10
    report("2 (eps=3 supplement)", ok, f"{texts}, identities exact: {identities}, {elapsed:.2f}s")
    assert ok


def test_criterion_3_identical_integrals(report):
    m = ReducedModel.identical(3, Fr(8), Fr(2))
    Is = {I.name: I for I in synthesize_integrals(m, search_darboux(m, 1))}
    base = (Fr(-3, 4),) * 3
    exps_ok = True
    for k, name in enumerate(("I4", "I5", "I6")):
        I = Is[name]
        # the unit adjustment sits on the coordinate missing from F
        missing = {0: 2, 1: 0, 2: 1}[k]
        want = tuple(b + (1 if i == missing else 0) for i, b in enumerate(base))
        exps_ok &= I.exponents == want and I.P0 == -m.f[0] / 4 and I.is_conserved(m)
    I1 = Is["I5/I4"]
    target_N = var(0) * (var(1) - var(2))
    target_D = var(2) * (var(0) - var(1))
    form_ok = I1.P0 == 0 and I1.numerator * target_D == I1.denominator * target_N

    # f = 1 keeps q_i - q_j resolvable in double precision over the whole window
    mn = ReducedModel.identical(3, Fr(1), Fr(2))
    I1n = [I for I in synthesize_integrals(mn, search_darboux(mn, 1)) if I.name == "I5/I4"][0]
    drifts = [verify_conservation(integrate(mn, q0, 20.0, tol=1e-11), I1n).max_relative_drift
              for q0 in random_initial_states(mn, 20, seed=0)]
    worst = max(drifts)
    ok = exps_ok and form_ok and worst <= 1e-6
    report("3", ok, f"I4-I6 exponents and P0=-f/4: {exps_ok}, I1 form: {form_ok}, "
                    f"max I1 drift over 20 runs {worst:.1e}")
    assert ok


def test_criterion_4_almost_identical(report):
    m = ReducedModel((Fr(1),) * 3, (Fr(21, 10), Fr(5, 2), Fr(29, 10)), (Fr(1),) * 3)
    det = m.det_beta()
    P = family_poly(m, 0, 1).P + coordinate_cofactor(m, 2)
    gamma, _ = decompose_cofactor(m, P)
    plin = [P.coeff(tuple(int(k == i) for k in range(3))) for i in range(3)]
    solved = tuple(exact.solve(exact.transpose(m.beta), plin))
    gamma_ok = almost_identical_gamma(m) == tuple(gamma) == solved
    P0 = almost_identical_P0(m)
    att = verify_attraction(m, search_darboux(m, 1), trials=100, t_end=50.0, seed=0)
    ok = det == Fr(-389, 40) and float(det) == -9.725 and gamma_ok and P0 < 0 and att.all_passed
    report("4", ok, f"det={det}, gamma equal: {gamma_ok}, P0={P0}, attraction {att.passed}/100 "
                    f"(worst decay {att.worst_decay:.1e}, E8 dist {att.max_e8_distance:.1e})")
    assert ok


def test_criterion_5_singular_beta(report):
    # e_i = -2b gives eps_i = -2; d_i = a - f_i sets f = (1, 2, -3)
    raw = OligopolyModel(Fr(4), Fr(1), (Fr(1),) * 3, (Fr(3), Fr(2), Fr(7)), (Fr(-2),) * 3, (Fr(1),) * 3)
    m = reduce(raw)
    (J,) = singular_beta_integral(m)
    form_ok = (m.f == (1, 2, -3) and m.eps == (-2, -2, -2) and m.det_beta() == 0
               and J.P0 == 0 and J.exponents == (1, 1, 1) and str(J.numerator) == "1")
    rng = np.random.default_rng(0)
    drift = resid = 0.0
    for q0 in rng.uniform(0.1, 1.0, (20, 3)):
        traj = integrate(m, q0, 0.3, tol=1e-11)
        drift = max(drift, verify_conservation(traj, J).max_relative_drift)
        resid = max(resid, float(growth_rate_residual(m, J.gamma, traj.states).max()))
    ok = form_ok and drift <= 1e-6 and resid <= 1e-8
    report("5", ok, f"I0 = {J.description}, P0={J.P0}, drift {drift:.1e}, growth residual {resid:.1e}")
    assert ok


def test_criterion_6_poincare(report):
    rng = np.random.default_rng(6)
    verdicts = []
    for _ in range(50):
        f = tuple(Fr(int(rng.integers(1, 40)), int(rng.integers(1, 9))) for _ in range(3))
        eps = tuple(Fr(int(rng.integers(11, 40)), int(rng.integers(1, 5))) for _ in range(3))
        m = ReducedModel(f, eps, (Fr(1),) * 3)
        verdicts.append(poincare_at(m, enumerate_critical_points(m)[0])[0])
    planted = ReducedModel((Fr(1), Fr(2), Fr(-3)), (Fr(3),) * 3, (Fr(1),) * 3)
    res = poincare_at(planted, enumerate_critical_points(planted)[0], 25)
    ok = all(v == "obstructed" for v in verdicts) and res == ("resonant", (1, 1, 1))
    report("6", ok, f"{verdicts.count('obstructed')}/50 obstructed, planted -> {res}")
    assert ok


def test_criterion_7_routh_hurwitz_vs_eigenvalues(report):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    checked = marginal = disagree = 0
    for _ in range(500):
        f = tuple(Fr(int(rng.integers(-20, 40)), int(rng.integers(1, 9))) for _ in range(3))
        eps = tuple(Fr(int(rng.integers(1, 40)), int(rng.integers(1, 9))) for _ in range(3))
        alpha = tuple(Fr(int(rng.integers(1, 20)), int(rng.integers(1, 9))) for _ in range(3))
        m = ReducedModel(f, eps, alpha)
        for pt in enumerate_critical_points(m):
            if pt.q is None:
                continue
            cp, eigs = characteristic_and_eigenvalues(jacobian_at(m, pt))
            scale = max(1.0, max(abs(z) for z in eigs))
            top = max(z.real for z in eigs)
            if abs(top) <= 1e-7 * scale:
                marginal += 1
                continue
            checked += 1
            disagree += routh_hurwitz(cp)[0] != (top < 0)
    elapsed = time.perf_counter() - t0
    ok = disagree == 0 and elapsed < 30
    report("7", ok, f"{checked} points agree ({disagree} disagreements, {marginal} marginal), {elapsed:.1f}s")
    assert ok


def test_criterion_8_leaf_reduction(report):
    m = ReducedModel((Fr(1),) * 3, (Fr(21, 10), Fr(5, 2), Fr(29, 10)), (Fr(1),) * 3)
    I1 = leaf_integral(m)
    rng = np.random.default_rng(8)
    devs, leaves = [], []
    for q0 in rng.uniform(0.1, 1.5, (10, 3)):
        leaves.append(I1.evaluate(q0))
        devs.append(lift_project_deviation(m, q0, t_end=10.0))
    worst = max(devs)
    ok = worst <= 1e-5
    report("8", ok, f"10 leaves C in [{min(leaves):.2f}, {max(leaves):.2f}], max sup-norm gap {worst:.1e}")
    assert ok


def test_criterion_9_lyapunov(report):
    m = ReducedModel.identical(3, Fr(8), Fr(2))
    pt = find_point(enumerate_critical_points(m), "E5", 3)
    cert = lyapunov_duopoly(m, pt)
    A = np.array(cert.A, dtype=float)
    K = np.array(cert.K, dtype=float)
    res = float(np.abs(A.T @ K + K @ A + np.eye(2)).max())
    pd = K[0, 0] > 0 and np.linalg.det(K) > 0
    ok = res <= 1e-10 and pd and cert.max_sampled_vdot < 0
    report("9", ok, f"|A^T K + K A + I| = {res:.1e}, K pos. def.: {pd}, radius {cert.sampled_negativity_radius:.3g}, "
                    f"max sampled dV/dt {cert.max_sampled_vdot:.2e} on 10^4 points")
    assert ok

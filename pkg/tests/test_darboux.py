import random
from fractions import Fraction as Fr

import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from oligodyn.darboux import (candidate_cofactors, cofactor_check, coordinate_cofactor,
                              darboux_residual, field_polys, linear_darboux_conditions,
                              search_darboux, solve_for_cofactor)
from oligodyn.errors import NotApplicableError, ValidationError
from oligodyn.model import ReducedModel
from oligodyn.poly import MultiPoly

from conftest import to_sympy

Q = sp.symbols("q1 q2 q3")


def var(i, n=3):
    return MultiPoly.var(n, i)


def random_model(rng, n=3):
    def r(lo, hi):
        return Fr(rng.randint(lo, hi), rng.randint(1, 7))
    return ReducedModel(tuple(r(1, 20) for _ in range(n)), tuple(r(15, 40) for _ in range(n)),
                        tuple(r(1, 9) for _ in range(n)))


def sympy_residual(m, F, P):
    V = [to_sympy(v, Q) for v in field_polys(m)]
    Fs = to_sympy(F, Q)
    return sp.expand(sum(V[i] * sp.diff(Fs, Q[i]) for i in range(3)) - to_sympy(P, Q) * Fs)


def test_coordinate_cofactor(symmetric):
    assert cofactor_check(symmetric, var(0)) == coordinate_cofactor(symmetric, 0)
    assert str(coordinate_cofactor(symmetric, 0)) == "-2*q1 - q2 - q3 + 8"


def test_difference_cofactor(symmetric):
    P = cofactor_check(symmetric, var(0) - var(1))
    assert str(P) == "-2*q1 - 2*q2 - q3 + 8"


def test_sum_is_not_darboux_generically():
    m = random_model(random.Random(1))
    assert cofactor_check(m, var(0) + var(1)) is None
    with pytest.raises(ValidationError):
        cofactor_check(m, MultiPoly(3))


def test_identical_degree_one(symmetric):
    res = search_darboux(symmetric, 1)
    assert [str(d.F) for d in res] == ["q1", "q2", "q3", "q1 - q2", "q2 - q3", "q1 - q3"]
    assert [d.constraints for d in res[:3]] == [()] * 3


def test_identical_degree_three_without_linear_costs():
    m = ReducedModel.identical(3, Fr(8), Fr(3))
    res = search_darboux(m, 3)
    assert len(res) == 6 and max(d.degree for d in res) == 1
    for d in res:
        assert darboux_residual(m, d.F, d.P).is_zero()
        assert sympy_residual(m, d.F, d.P) == 0


def test_linear_cost_identical_firms_have_cubic_polynomials(symmetric):
    res = search_darboux(symmetric, 3)
    cubics = [d for d in res if d.degree == 3]
    assert len(cubics) == 4
    for d in cubics:
        assert sympy_residual(symmetric, d.F, d.P) == 0
        # irreducible over the rationals
        assert len(sp.factor_list(to_sympy(d.F, Q))[1]) == 1
    assert {str(d.P) for d in cubics} >= {"-4*q1 - 4*q2 - 4*q3 + 16", "-6*q1 - 3*q2 - 3*q3 + 16"}


def test_almost_identical_linear_polys(almost_identical):
    res = search_darboux(almost_identical, 1)
    extra = [d for d in res if not d.is_coordinate]
    e = almost_identical.eps
    F4 = (var(0) * (e[0] - 1) - var(1) * (e[1] - 1)).monic()
    assert extra[0].F == F4
    assert extra[0].P == MultiPoly.linear((-e[0], -e[1], Fr(-1)), Fr(1))


def test_generic_model_has_only_coordinates():
    rng = random.Random(7)
    for _ in range(3):
        m = random_model(rng)
        res = search_darboux(m, 3)
        assert [str(d.F) for d in res] == ["q1", "q2", "q3"]


def test_products_are_excluded(symmetric):
    # q1*q2 is Darboux but must not be reported as new
    P = coordinate_cofactor(symmetric, 0) + coordinate_cofactor(symmetric, 1)
    assert cofactor_check(symmetric, var(0) * var(1)) == P
    assert all(d.degree != 2 for d in search_darboux(symmetric, 2))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_solutions_satisfy_identity(seed):
    m = random_model(random.Random(seed))
    for P in candidate_cofactors(m, 1):
        for F in solve_for_cofactor(m, P, 1):
            assert darboux_residual(m, F, P).is_zero()


def test_search_errors(symmetric):
    with pytest.raises(ValidationError):
        search_darboux(symmetric, 7)
    with pytest.raises(ValidationError):
        search_darboux(ReducedModel.identical(3, 8.0, 2.0), 1)
    with pytest.raises(NotApplicableError):
        candidate_cofactors(ReducedModel((Fr(0), Fr(1), Fr(1)), (Fr(3),) * 3, (Fr(1),) * 3), 1)


def test_four_firms_degree_two():
    m = ReducedModel((Fr(1),) * 4, (Fr(21, 10), Fr(11, 5), Fr(23, 10), Fr(12, 5)), (Fr(1),) * 4)
    res = search_darboux(m, 2)
    assert sum(d.is_coordinate for d in res) == 4
    assert sum(1 for d in res if d.degree == 1 and not d.is_coordinate) == 6
    assert all(darboux_residual(m, d.F, d.P).is_zero() for d in res)


def test_linear_conditions_symmetric(symmetric):
    rep = linear_darboux_conditions(symmetric)
    assert rep.D1_printed == -2 and rep.D1_matrix == 2 and rep.printed_differs
    assert rep.all_f_equal and all(h for _, h, _, _ in rep.exceptional)
    for _, _, F, P in rep.exceptional:
        assert darboux_residual(symmetric, F, P).is_zero()


def test_linear_conditions_generic():
    m = random_model(random.Random(3))
    rep = linear_darboux_conditions(m)
    assert not rep.any_holds
    with pytest.raises(ValidationError):
        linear_darboux_conditions(ReducedModel.identical(2, Fr(1), Fr(3)))


def test_linear_conditions_agree_with_search():
    rng = random.Random(11)
    models = [random_model(rng) for _ in range(4)]
    models.append(ReducedModel((Fr(2), Fr(3), Fr(3)), (Fr(4), Fr(5), Fr(6)), (Fr(1), Fr(2), Fr(2))))
    models.append(ReducedModel((Fr(2), Fr(3), Fr(5)), (Fr(4), Fr(5), Fr(6)), (Fr(1),) * 3))
    for m in models:
        rep = linear_darboux_conditions(m)
        found = [d for d in search_darboux(m, 1) if not d.is_coordinate]
        assert bool(found) == rep.any_holds


@settings(max_examples=8, deadline=None)
@given(st.permutations([0, 1, 2]), st.sampled_from(["almost", "random", "pair"]))
def test_permutation_equivariance(perm, kind):
    rng = random.Random(4)
    if kind == "almost":
        m = ReducedModel((Fr(1),) * 3, (Fr(21, 10), Fr(5, 2), Fr(29, 10)), (Fr(1),) * 3)
    elif kind == "pair":
        m = ReducedModel((Fr(2), Fr(3), Fr(3)), (Fr(4), Fr(5), Fr(6)), (Fr(1), Fr(2), Fr(2)))
    else:
        m = random_model(rng)
    mp = m.permuted(perm)
    # slot k of mp holds firm perm[k] of m
    def relabel(F):
        return MultiPoly(3, {tuple(e[perm[k]] for k in range(3)): c for e, c in F.terms.items()}).monic()
    a = {relabel(d.F) for d in search_darboux(m, 2)}
    b = {d.F for d in search_darboux(mp, 2)}
    assert a == b


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=Fr(1, 10), max_value=Fr(10), max_denominator=20),
       st.fractions(min_value=0, max_value=Fr(10), max_denominator=20))
def test_identical_det_beta_negative(b, e):
    x = (b + e) / b
    m = ReducedModel.identical(3, Fr(1), 2 * x)
    assert m.det_beta() == -8 * x**3 + 6 * x - 2
    assert m.det_beta() < 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=Fr(201, 100), max_value=Fr(10), max_denominator=100), min_size=3, max_size=3))
def test_almost_identical_det_beta_negative(eps):
    assert ReducedModel((Fr(1),) * 3, tuple(eps), (Fr(1),) * 3).det_beta() < 0

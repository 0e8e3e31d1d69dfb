from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from oligodyn.equilibria import (admissibility_case, enumerate_critical_points, find_point,
                                 residual, support_label)
from oligodyn.errors import DegenerateError, ValidationError
from oligodyn.model import OligopolyModel, ReducedModel, reduce, vector_field

pos = st.fractions(min_value=Fr(1, 5), max_value=Fr(30), max_denominator=12)


def closed_forms(a, b, e):
    """Equilibria E1..E8 written directly in the raw parameters."""
    a1, a2, a3 = a
    b1, b2, b3 = (b + x for x in e)

    def duo(ai, aj, bi, bj):
        den = 4 * bi * bj - b * b
        return (2 * ai * bj - b * aj) / den, (2 * aj * bi - b * ai) / den

    den = 8 * b1 * b2 * b3 + 2 * b**3 - 2 * (b1 + b2 + b3) * b**2
    e8 = (
        (4 * a1 * b2 * b3 + (-a1 + a2 + a3) * b**2 - 2 * (a2 * b3 + a3 * b2) * b) / den,
        (4 * a2 * b1 * b3 + (a1 - a2 + a3) * b**2 - 2 * (a1 * b3 + a3 * b1) * b) / den,
        (4 * a3 * b1 * b2 + (a1 + a2 - a3) * b**2 - 2 * (a1 * b2 + a2 * b1) * b) / den,
    )
    x12, y12 = duo(a1, a2, b1, b2)
    y23, z23 = duo(a2, a3, b2, b3)
    x13, z13 = duo(a1, a3, b1, b3)
    return {
        "E1": (0, 0, 0), "E2": (a1 / (2 * b1), 0, 0), "E3": (0, a2 / (2 * b2), 0),
        "E4": (0, 0, a3 / (2 * b3)), "E5": (x12, y12, 0), "E6": (0, y23, z23),
        "E7": (x13, 0, z13), "E8": e8,
    }


@settings(max_examples=40, deadline=None)
@given(st.lists(pos, min_size=3, max_size=3), pos, st.lists(pos, min_size=3, max_size=3),
       st.lists(pos, min_size=3, max_size=3))
def test_matches_closed_forms(ai, b, e, alpha):
    d = [Fr(40) - x for x in ai]
    m = OligopolyModel(Fr(40), b, (1, 1, 1), tuple(d), tuple(e), tuple(alpha))
    r = reduce(m)
    expected = closed_forms(ai, b, e)
    pts = enumerate_critical_points(r)
    assert len(pts) == 8
    for p in pts:
        if p.degenerate:
            continue
        assert p.q == expected[p.e_label(3)]
        assert residual(r, p) == 0


def test_symmetric_full_point(symmetric):
    pts = enumerate_critical_points(symmetric)
    assert pts[0].label == "origin" and pts[0].q == (0, 0, 0)
    assert pts[-1].q == (2, 2, 2) and pts[-1].label == "full-oligopoly"
    assert find_point(pts, "E8", 3) is pts[-1]
    assert find_point(pts, "0b011", 3).label == "duopoly(1,2)"
    assert find_point(pts, 4, 3).q == (0, 0, 4)


def test_eq33_coincidence(eq33):
    pts = enumerate_critical_points(eq33)
    e5 = find_point(pts, "E5", 3)
    e3 = find_point(pts, "E3", 3)
    assert e5.q == (0, 20, 0) == e3.q
    assert e3.bitmask in e5.coincides_with and e5.bitmask in e3.coincides_with
    # the q1 numerator 2 a1 b2 - b a2 vanishes, while 2 a2 b1 - b a1 does not
    a1, a2, b, b1, b2 = 10, 20, Fr(1, 2), Fr(1, 2), Fr(1, 2)
    assert 2 * a1 * b2 - b * a2 == 0 and 2 * a2 * b1 - b * a1 == 15
    assert admissibility_case(eq33) == "IIa"


def test_admissibility_cases(symmetric):
    assert admissibility_case(symmetric) == "I"
    lopsided = reduce(OligopolyModel(Fr(100), Fr(1), (1, 1, 1), (Fr(0), Fr(99), Fr(99)), (0, 0, 0), (1, 1, 1)))
    assert admissibility_case(lopsided) == "IIb"
    with pytest.raises(ValidationError):
        admissibility_case(ReducedModel.identical(2, Fr(1), Fr(2)))


def test_degenerate_support(singular):
    pts = enumerate_critical_points(singular)
    full = pts[-1]
    assert full.degenerate and full.label == "degenerate" and full.q is None
    with pytest.raises(DegenerateError):
        admissibility_case(singular)


def test_float_mode_residual():
    r = ReducedModel((1.0, 1.3, 0.7), (2.1, 2.5, 2.9), (1.0, 0.5, 2.0))
    for p in enumerate_critical_points(r):
        assert max(abs(v) for v in vector_field(r, p.q)) <= 1e-10


def test_submanifold_placement():
    r = ReducedModel((Fr(3), Fr(2), Fr(5), Fr(4)), (Fr(5), Fr(3), Fr(4), Fr(6)), (Fr(1),) * 4)
    for p in enumerate_critical_points(r):
        assert all(p.q[i] == 0 for i in range(4) if i not in p.support)
    assert support_label((0, 2, 3), 4) == "oligopoly(1,3,4)"
    assert support_label((0, 1, 2, 3), 4) == "full-oligopoly"


def test_cap():
    big = ReducedModel.identical(21, Fr(1), Fr(3))
    with pytest.raises(ValidationError):
        enumerate_critical_points(big)

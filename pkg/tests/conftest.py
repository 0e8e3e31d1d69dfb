from fractions import Fraction as Fr
from pathlib import Path

import pytest
import sympy as sp

from oligodyn.model import OligopolyModel, ReducedModel, reduce

MODELS = Path(__file__).resolve().parent.parent / "demos" / "models"


def to_sympy(poly, symbols):
    """MultiPoly -> sympy expression (test oracle only)."""
    return sp.Add(*[
        sp.Rational(Fr(c).numerator, Fr(c).denominator) * sp.Mul(*[s**k for s, k in zip(symbols, e)])
        for e, c in poly.terms.items()
    ])


def symmetric_raw():
    return OligopolyModel.identical(3, a=Fr(10), b=Fr(1), c=Fr(1), d=Fr(2), e=Fr(0))


@pytest.fixture
def symmetric():
    """Identical firms, linear cost: f = 8, eps = 2."""
    return reduce(symmetric_raw())


@pytest.fixture
def almost_identical():
    return ReducedModel((Fr(1),) * 3, (Fr(21, 10), Fr(5, 2), Fr(29, 10)), (Fr(1),) * 3)


@pytest.fixture
def singular():
    return ReducedModel((Fr(1), Fr(2), Fr(-3)), (Fr(-2),) * 3, (Fr(1),) * 3)


@pytest.fixture
def eq33():
    return reduce(OligopolyModel(Fr(40), Fr(1, 2), (Fr(1),) * 3, (Fr(30), Fr(20), Fr(10)),
                                 (Fr(0),) * 3, (Fr(1),) * 3))

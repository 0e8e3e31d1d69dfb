"""Sparse multivariate polynomials with exact coefficients."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable

from .model import fmt_scalar


def monomials(n: int, degree: int) -> list[tuple]:
    """All exponent tuples in n variables of total degree exactly ``degree``,
    in graded-lex order (largest first)."""
    out = set()
    for combo in combinations_with_replacement(range(n), degree):
        e = [0] * n
        for k in combo:
            e[k] += 1
        out.add(tuple(e))
    return sorted(out, reverse=True)


def monomials_upto(n: int, degree: int) -> list[tuple]:
    out = []
    for d in range(degree, -1, -1):
        out.extend(monomials(n, d))
    return out


def grlex_key(e: tuple):
    return (sum(e), e)


class MultiPoly:
    """Polynomial in ``q_1..q_n``: a map from exponent tuples to coefficients.

    Zero coefficients are never stored.  Iteration, printing and hashing use
    graded-lexicographic order, highest term first.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != n:
                raise ValueError(f"exponent {e} does not match n={n}")
            if c != 0:
                clean[e] = clean.get(e, 0) + c
                if clean[e] == 0:
                    del clean[e]
        self.terms = clean

    # construction ---------------------------------------------------------
    @classmethod
    def var(cls, n: int, i: int, coeff=1) -> "MultiPoly":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): Fraction(coeff)})

    @classmethod
    def const(cls, n: int, c) -> "MultiPoly":
        return cls(n, {(0,) * n: c})

    @classmethod
    def linear(cls, coeffs: Iterable, const=0) -> "MultiPoly":
        """``const + sum_i coeffs[i] q_i``."""
        coeffs = list(coeffs)
        n = len(coeffs)
        terms = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = c
        return cls(n, terms)

    @classmethod
    def from_vector(cls, n: int, basis: list[tuple], coeffs) -> "MultiPoly":
        return cls(n, dict(zip(basis, coeffs)))

    # structure ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def leading(self):
        return self.sorted_terms()[0]

    def coeff(self, e) -> object:
        return self.terms.get(tuple(e), 0)

    def constant_term(self):
        return self.coeff((0,) * self.n)

    def linear_coeffs(self) -> list:
        out = []
        for i in range(self.n):
            e = [0] * self.n
            e[i] = 1
            out.append(self.coeff(e))
        return out

    def monic(self) -> "MultiPoly":
        """Scale so that the leading graded-lex coefficient is 1."""
        if self.is_zero():
            return self
        return self * (1 / Fraction(self.leading()[1]))

    # arithmetic -----------------------------------------------------------
    def _check(self, other):
        if other.n != self.n:
            raise ValueError("polynomials live in different rings")

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(self.n, other)
        self._check(other)
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return MultiPoly(self.n, t)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, MultiPoly) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return MultiPoly(self.n, {e: c * other for e, c in self.terms.items()})
        self._check(other)
        t = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return MultiPoly(self.n, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = MultiPoly.const(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(self.n, other)
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(self.sorted_terms())))

    def diff(self, i: int) -> "MultiPoly":
        t = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                t[tuple(e2)] = c * e[i]
        return MultiPoly(self.n, t)

    def __call__(self, q):
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(q, e):
                if k:
                    term = term * x**k
            total = total + term
        return total

    def divmod(self, other: "MultiPoly"):
        """Multivariate division by a single polynomial (graded-lex order).

        Returns ``(quotient, remainder)``; the remainder is zero exactly
        when ``other`` divides ``self``.
        """
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead_e, lead_c = other.leading()
        quot = {}
        rem = {}
        p = dict(self.terms)
        while p:
            e = max(p, key=grlex_key)
            c = p[e]
            if all(a >= b for a, b in zip(e, lead_e)):
                qe = tuple(a - b for a, b in zip(e, lead_e))
                qc = Fraction(c) / Fraction(lead_c) if not isinstance(c, float) else c / lead_c
                quot[qe] = quot.get(qe, 0) + qc
                for oe, oc in other.terms.items():
                    te = tuple(a + b for a, b in zip(qe, oe))
                    p[te] = p.get(te, 0) - qc * oc
                    if p[te] == 0:
                        del p[te]
            else:
                rem[e] = c
                del p[e]
        return MultiPoly(self.n, quot), MultiPoly(self.n, rem)

    def evaluator(self):
        """Float evaluator over arrays whose last axis holds ``q_1..q_n``."""
        import numpy as np

        if not self.terms:
            return lambda q: np.zeros(np.shape(q)[:-1])
        exps = np.array(list(self.terms), dtype=float)
        coefs = np.array([float(c) for c in self.terms.values()])

        def ev(q):
            q = np.asarray(q, dtype=float)
            return np.prod(q[..., None, :] ** exps, axis=-1) @ coefs

        return ev

    # display --------------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(
                f"q{i + 1}" if k == 1 else f"q{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            neg = c < 0
            mag = -c if neg else c
            if mono:
                txt = mono if mag == 1 else f"{fmt_scalar(mag)}*{mono}"
            else:
                txt = fmt_scalar(mag)
            parts.append(("- " if neg else "+ ") + txt)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"MultiPoly({self})"

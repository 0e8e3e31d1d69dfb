"""Darboux polynomials of the reduced model.

A polynomial F is a Darboux polynomial with cofactor P when
``V . grad F = P F`` identically, where ``V_i = q_i (f_i + sum_j beta_ij q_j)``.
Because V is quadratic, P has degree at most one: ``P = p0 + sum_i p_i q_i``.

The search fixes P first and then solves a *linear* system for the
coefficients of F.  Candidate cofactors come from a necessary condition at
every critical point q*: if the lowest-order part of F at q* has degree k,
then P(q*) is an eigenvalue of the Jacobian's induced action on degree-k
forms, i.e. ``P(q*) = sum n_i lambda_i`` with ``n_i >= 0`` and
``sum n_i = k <= deg F``.  The origin fixes the finitely many values of p0
and each monopoly point fixes p_i; the other critical points prune.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from . import exact
from .equilibria import enumerate_critical_points
from .errors import NotApplicableError, ValidationError
from .model import EXACT, ReducedModel
from .poly import MultiPoly, monomials_upto
from .stability import jacobian_at

MAX_DEGREE = 6
_FILTER_TOL = 1e-7


@dataclass(frozen=True)
class DarbouxPoly:
    F: MultiPoly
    P: MultiPoly
    constraints: tuple = field(default=())

    @property
    def degree(self) -> int:
        return self.F.degree

    @property
    def is_coordinate(self) -> bool:
        return len(self.F.terms) == 1 and self.F.degree == 1

    def __str__(self):
        return f"F = {self.F}, P = {self.P}"


def field_polys(m: ReducedModel) -> list[MultiPoly]:
    """Components ``V_i = q_i (f_i + L_i)`` as polynomials."""
    n = m.n
    out = []
    for i in range(n):
        growth = MultiPoly.linear(m.beta[i], m.f[i])
        out.append(MultiPoly.var(n, i) * growth)
    return out


def coordinate_cofactor(m: ReducedModel, i: int) -> MultiPoly:
    """Cofactor of ``q_i``: ``f_i + L_i``."""
    return MultiPoly.linear(m.beta[i], m.f[i])


def lie_derivative(m: ReducedModel, F: MultiPoly) -> MultiPoly:
    V = field_polys(m)
    out = MultiPoly(m.n)
    for i in range(m.n):
        d = F.diff(i)
        if not d.is_zero():
            out = out + V[i] * d
    return out


def darboux_residual(m: ReducedModel, F: MultiPoly, P: MultiPoly) -> MultiPoly:
    """``V . grad F - P F``; the zero polynomial for a genuine pair."""
    return lie_derivative(m, F) - P * F


def cofactor_check(m: ReducedModel, F: MultiPoly) -> MultiPoly | None:
    """Return the cofactor of F, or None when F does not divide its derivative."""
    if F.is_zero():
        raise ValidationError("F must be nonzero")
    quot, rem = lie_derivative(m, F).divmod(F)
    return quot if rem.is_zero() else None


# ----------------------------------------------------------------- search


def _combo_values(eigs, k: int) -> list:
    """All ``sum n_i lambda_i`` with ``n_i >= 0`` and ``sum n_i <= k`` (with repeats)."""
    zero = eigs[0] * 0
    out = []
    for deg in range(k + 1):
        for combo in combinations_with_replacement(range(len(eigs)), deg):
            out.append(sum((eigs[c] for c in combo), zero))
    return out


def _operator_matrix(m: ReducedModel, P: MultiPoly, degree: int, num=Fraction):
    """Matrix of ``F -> V.grad F - P F`` on polynomials of degree <= ``degree``.

    On a monomial ``q^a`` the operator gives
    ``q^a ((a.f - p0) + sum_j ((a^T beta)_j - p_j) q_j)``.
    ``num`` picks the scalar type (Fraction, or float for the rank prefilter).
    """
    n = m.n
    cols = monomials_upto(n, degree)
    rows = monomials_upto(n, degree + 1)
    row_index = {e: k for k, e in enumerate(rows)}
    f = [num(x) for x in m.f]
    beta = [[num(x) for x in row] for row in m.beta]
    p0 = num(P.constant_term())
    plin = [num(c) for c in P.linear_coeffs()]
    zero = num(0)
    A = [[zero] * len(cols) for _ in rows]
    for c, a in enumerate(cols):
        A[row_index[a]][c] += sum((a[i] * f[i] for i in range(n)), zero) - p0
        for j in range(n):
            coef = sum((a[i] * beta[i][j] for i in range(n)), zero) - plin[j]
            if coef:
                t = list(a)
                t[j] += 1
                A[row_index[tuple(t)]][c] += coef
    return A, cols


def _clearly_full_rank(A) -> bool:
    """Float test that can only err towards "not sure".

    Rounding perturbs singular values by about 1e-15 * ||A||, so a smallest
    singular value above 1e-9 * ||A|| proves exact full column rank.
    """
    s = np.linalg.svd(np.array(A), compute_uv=False)
    return bool(s[-1] > 1e-9 * s[0])


def solve_for_cofactor(m: ReducedModel, P: MultiPoly, degree: int) -> list[MultiPoly]:
    """Basis of all F of degree <= ``degree`` with ``V.grad F = P F`` (exact null space)."""
    if _clearly_full_rank(_operator_matrix(m, P, degree, float)[0]):
        return []
    A, cols = _operator_matrix(m, P, degree)
    return [MultiPoly.from_vector(m.n, cols, v) for v in exact.nullspace(A, len(cols))]


class _Filter:
    """Float check ``P(q*) in {sum n_i lambda_i(q*)}`` at one critical point."""

    def __init__(self, q, eigs, degree):
        self.q = np.array([float(x) for x in q])
        self.vals = np.array(_combo_values([complex(z) for z in eigs], degree))
        self.scale = 1.0 + np.abs(np.array(eigs)).max() * degree

    def accepts(self, p0: float, plin: np.ndarray) -> bool:
        v = p0 + float(plin @ self.q)
        return bool(np.min(np.abs(self.vals - v)) <= _FILTER_TOL * self.scale)


def candidate_cofactors(m: ReducedModel, degree: int) -> list[MultiPoly]:
    """Finite superset of the cofactors of Darboux polynomials of degree <= ``degree``."""
    n = m.n
    points = enumerate_critical_points(m)
    x = []
    for i in range(n):
        if m.f[i] == 0 or m.eps[i] == 0:
            raise NotApplicableError("cofactor enumeration needs f_i != 0 and eps_i != 0")
        x.append(m.f[i] / m.eps[i])
    origin_vals = sorted(set(_combo_values(list(m.f), degree)))
    mono_vals = []
    for i in range(n):
        pt = points[1 << i]
        M = jacobian_at(m, pt)
        mono_vals.append(sorted(set(_combo_values([M[k][k] for k in range(n)], degree))))

    # pruning filters keyed by the highest firm index of their support
    filters = {i: [] for i in range(n)}
    for pt in points:
        if pt.q is None or len(pt.support) < 2:
            continue
        M = np.array(jacobian_at(m, pt), dtype=float)
        filters[max(pt.support)].append(_Filter(pt.q, np.linalg.eigvals(M), degree))

    out = []
    plin = [Fraction(0)] * n
    plin_f = np.zeros(n)

    def rec(i, p0):
        if i == n:
            out.append(MultiPoly.linear(list(plin), p0))
            return
        seen = set()
        for s in mono_vals[i]:
            pi = (s - p0) / x[i]
            if pi in seen:
                continue
            seen.add(pi)
            plin[i] = pi
            plin_f[i] = float(pi)
            if all(flt.accepts(float(p0), plin_f) for flt in filters[i]):
                rec(i + 1, p0)
        plin[i] = Fraction(0)
        plin_f[i] = 0.0

    for p0 in origin_vals:
        rec(0, p0)
    return out


def _products(found: list[DarbouxPoly], degree: int, P: MultiPoly, n: int):
    """Products of ``found`` elements with total degree <= ``degree`` and cofactor ``P``."""
    zero = MultiPoly(n)
    out = []

    def rec(start, deg_left, F, cof):
        if cof == P:
            out.append(F)
        for k in range(start, len(found)):
            d = found[k]
            if d.degree <= deg_left:
                rec(k, deg_left - d.degree, F * d.F, cof + d.P)

    rec(0, degree, MultiPoly.const(n, 1), zero)
    return out


def _annotate(m: ReducedModel, F: MultiPoly) -> tuple:
    n = m.n
    if F.degree != 1 or F.constant_term() != 0:
        return ("holds for these parameter values",) if F.degree > 1 else ()
    w = F.linear_coeffs()
    nz = [i for i in range(n) if w[i] != 0]
    if len(nz) == 1:
        return ()
    if n == 3 and len(nz) == 2:
        j, k = nz
        return (f"f{j + 1} = f{k + 1}", f"alpha{j + 1} = alpha{k + 1}")
    return ("D1 = 0",) if n == 3 else ("holds for these parameter values",)


def search_darboux(m: ReducedModel, max_degree: int) -> list[DarbouxPoly]:
    """Irreducible Darboux polynomials up to ``max_degree``.

    For each degree d the candidate cofactors are enumerated, the linear
    system for F is solved exactly, and solutions lying in the span of
    products of lower-degree results are dropped.  Each returned F is
    scaled to leading coefficient 1.
    """
    if m.mode != EXACT:
        raise ValidationError("Darboux search requires an exact model")
    if not 1 <= max_degree <= MAX_DEGREE:
        raise ValidationError(f"max_degree must be in 1..{MAX_DEGREE}")
    n = m.n
    found: list[DarbouxPoly] = []
    for d in range(1, max_degree + 1):
        basis = monomials_upto(n, d)
        new_here = []
        for P in candidate_cofactors(m, d):
            sols = solve_for_cofactor(m, P, d)
            if not sols:
                continue
            known = _products(found, d, P, n)
            vecs = [[F.coeff(e) for e in basis] for F in known]
            r = exact.rank(vecs) if vecs else 0
            for F in sols:
                v = [F.coeff(e) for e in basis]
                r2 = exact.rank(vecs + [v])
                if r2 > r:
                    vecs.append(v)
                    r = r2
                    F = F.monic()
                    new_here.append(DarbouxPoly(F, P, _annotate(m, F)))
        new_here.sort(key=_sort_key)
        found.extend(new_here)
    return found


def _sort_key(d: DarbouxPoly):
    """Coordinates first, then two-term linear forms in cyclic pair order, then grlex."""
    n = d.F.n
    support = [i for i in range(n) if any(e[i] for e in d.F.terms)]
    if d.degree == 1 and len(support) == 2:
        i, j = support
        gap = j - i
        cyc = (gap, i) if gap <= n - gap else (n - gap, j)
        return (1, 1, cyc, ())
    grl = tuple((-sum(e), tuple(-x for x in e)) for e, _ in d.F.sorted_terms())
    return (d.degree, 0 if d.is_coordinate else 2, (), grl)


# ------------------------------------------------------------ linear theory


@dataclass(frozen=True)
class LinearConditions:
    """Evaluation of the linear-Darboux solvability conditions for n = 3."""

    D1_printed: Fraction
    D1_matrix: Fraction
    generic_null_vector: tuple | None
    all_f_equal: bool
    w0_zero_branch: bool
    w0_one_branch: bool
    exceptional: tuple  # (zero_index, holds, F, P) per cyclic choice

    @property
    def printed_differs(self) -> bool:
        return self.D1_printed != self.D1_matrix

    @property
    def any_holds(self) -> bool:
        return self.w0_zero_branch or self.w0_one_branch or any(h for _, h, _, _ in self.exceptional)


def linear_system_matrix(m: ReducedModel):
    """Coefficient matrix for (w1, w2, w3) when all w_i are nonzero and p_i = -eps_i."""
    a, e = m.alpha, m.eps
    return [
        [a[0] - e[1], a[1] - e[0], 0],
        [a[0] - e[2], 0, a[2] - e[0]],
        [0, a[1] - e[2], a[2] - e[1]],
    ]


def d1_printed(m: ReducedModel):
    a, e = m.alpha, m.eps
    return (a[0] - e[2]) * (a[1] - e[0]) * (a[2] - e[1]) + (a[0] - e[1]) * (a[1] - e[1]) * (a[2] - e[0])


def linear_darboux_conditions(m: ReducedModel) -> LinearConditions:
    """Which linear Darboux branches are open for a 3-firm model.

    The generic branch (all w_i nonzero) needs the 3x3 determinant to
    vanish; with ``w0 = 0`` all f_i must coincide, with ``w0 = 1`` the
    coefficients must satisfy ``f_i w_i = -eps_i``.  The exceptional branch
    with ``w_i = 0`` needs ``f_j = f_k`` and ``alpha_j = alpha_k``.
    """
    if m.n != 3:
        raise ValidationError("linear Darboux conditions are stated for n = 3")
    if m.mode != EXACT:
        raise ValidationError("exact model required")
    mat = linear_system_matrix(m)
    dm = exact.det(mat)
    null = None
    w0_zero = w0_one = False
    all_f_equal = len(set(m.f)) == 1
    if dm == 0:
        ns = exact.nullspace(mat, 3)
        if len(ns) == 1 and all(x != 0 for x in ns[0]):
            null = tuple(ns[0])
            w0_zero = all_f_equal
            w = [-m.eps[i] / m.f[i] if m.f[i] != 0 else None for i in range(3)]
            if None not in w:
                ratio = w[0] / null[0]
                w0_one = all(w[i] == ratio * null[i] for i in range(3))
    exc = []
    n = 3
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        holds = m.f[j] == m.f[k] and m.alpha[j] == m.alpha[k]
        F = P = None
        if holds:
            w = [Fraction(0)] * n
            w[j] = m.alpha[j] - m.eps[j]
            w[k] = m.eps[k] - m.alpha[j]
            F = MultiPoly.linear(w)
            pl = [Fraction(0)] * n
            pl[i] = -m.alpha[j]
            pl[j] = -m.eps[j]
            pl[k] = -m.eps[k]
            P = MultiPoly.linear(pl, m.f[j])
            if F.is_zero():
                holds, F, P = False, None, None
        exc.append((i, holds, F, P))
    return LinearConditions(d1_printed(m), dm, null, all_f_equal, w0_zero, w0_one, tuple(exc))

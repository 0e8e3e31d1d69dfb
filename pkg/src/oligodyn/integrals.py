"""First integrals built from Darboux polynomials.

Every integral here has the shape

    I(t, q) = exp(-P0 t) * N(q) / D(q) * prod_i q_i ** e_i

with polynomials N, D and rational exponents e.  Along the flow the
logarithmic derivative of the q-dependent part is the constant P0, so I
is conserved.  When P0 = 0 the integral does not depend on t.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import exact
from .darboux import DarbouxPoly, cofactor_check, coordinate_cofactor
from .errors import DomainError, NotApplicableError, ValidationError
from .model import EXACT, ReducedModel, fmt_scalar
from .poly import MultiPoly

TIME_DEPENDENT = "time-dependent"
TIME_INDEPENDENT = "time-independent"
RATIONAL_RATIO = "rational-ratio"


def _describe(P0, N: MultiPoly, D: MultiPoly, exps) -> str:
    parts = []
    if P0 != 0:
        parts.append(f"exp({fmt_scalar(-P0)}*t)")
    if N != 1:
        parts.append(f"({N})")
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(f"q{i + 1}")
        elif e != 0:
            parts.append(f"q{i + 1}^({fmt_scalar(e)})")
    text = " * ".join(parts) or "1"
    if D != 1:
        text += f" / ({D})"
    return text


@dataclass(frozen=True)
class FirstIntegral:
    """``exp(-P0 t) * numerator / denominator * prod q_i^exponents_i``.

    ``gamma`` is the cofactor decomposition the integral was built from
    (the exponents are ``-gamma`` for a single Darboux polynomial).
    """

    kind: str
    numerator: MultiPoly
    exponents: tuple
    P0: Fraction
    denominator: MultiPoly = None
    gamma: tuple = ()
    name: str = ""
    sources: tuple = field(default=())

    def __post_init__(self):
        if self.denominator is None:
            object.__setattr__(self, "denominator", MultiPoly.const(self.numerator.n, 1))

    @property
    def n(self) -> int:
        return self.numerator.n

    @property
    def poly_factor(self) -> MultiPoly:
        return self.numerator

    @property
    def description(self) -> str:
        return _describe(self.P0, self.numerator, self.denominator, self.exponents)

    def __str__(self):
        return f"{self.name} = {self.description}" if self.name else self.description

    # exact checks ---------------------------------------------------------
    def cofactor(self, m: ReducedModel) -> MultiPoly:
        """Logarithmic time derivative of the q-dependent part (should be the constant P0)."""
        total = MultiPoly(m.n)
        for poly, sign in ((self.numerator, 1), (self.denominator, -1)):
            if poly.degree > 0:
                P = cofactor_check(m, poly)
                if P is None:
                    raise ValidationError(f"{poly} is not a Darboux polynomial of this model")
                total = total + P * sign
        for i, e in enumerate(self.exponents):
            if e:
                total = total + coordinate_cofactor(m, i) * e
        return total

    def is_conserved(self, m: ReducedModel) -> bool:
        return self.cofactor(m) == MultiPoly.const(m.n, self.P0)

    def log_gradient(self, q) -> list:
        """Gradient of ``log |I|`` in q (exact when q is rational)."""
        N, D = self.numerator, self.denominator
        nv, dv = N(q), D(q)
        out = []
        for k in range(self.n):
            g = self.exponents[k] / q[k] if self.exponents[k] else 0
            g = g + N.diff(k)(q) / nv - D.diff(k)(q) / dv
            out.append(g)
        return out

    # numerics -------------------------------------------------------------
    def evaluate(self, q, t: float = 0.0) -> float:
        return float(self.evaluate_batch(np.asarray(q, dtype=float)[None, :], np.array([t]))[0])

    def evaluate_batch(self, Q, T=None) -> np.ndarray:
        """Values along samples ``Q`` of shape (k, n) at times ``T``.

        Raises DomainError outside the open positive orthant or where the
        denominator vanishes.
        """
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[1] != self.n:
            raise ValidationError(f"expected samples of shape (k, {self.n})")
        if np.any(Q <= 0):
            raise DomainError("integral is defined only for positive q")
        den = self.denominator.evaluator()(Q)
        if np.any(den == 0):
            raise DomainError("denominator of the integral vanishes")
        val = self.numerator.evaluator()(Q) / den
        exps = np.array([float(e) for e in self.exponents])
        val = val * np.exp(np.log(Q) @ exps)
        if self.P0 != 0:
            T = np.zeros(len(Q)) if T is None else np.asarray(T, dtype=float)
            val = val * np.exp(-float(self.P0) * T)
        return val


# ------------------------------------------------------------ construction


def decompose_cofactor(m: ReducedModel, P: MultiPoly):
    """Write the linear part of P as ``sum gamma_i L_i``; return ``(gamma, P0)``.

    ``L_i = sum_j beta_ij q_j``, so ``gamma = p beta^{-1}`` and the remaining
    constant is ``P0 = p0 - sum f_i gamma_i``.
    """
    if m.det_beta() == 0:
        raise NotApplicableError("cofactor decomposition needs det(beta) != 0")
    inv = exact.inverse(m.beta)
    gamma = exact.vecmat([Fraction(c) for c in P.linear_coeffs()], inv)
    P0 = Fraction(P.constant_term()) - sum((g * fi for g, fi in zip(gamma, m.f)), Fraction(0))
    return tuple(gamma), P0


def integral_from_darboux(m: ReducedModel, d: DarbouxPoly, name: str = "") -> FirstIntegral:
    gamma, P0 = decompose_cofactor(m, d.P)
    kind = TIME_INDEPENDENT if P0 == 0 else TIME_DEPENDENT
    return FirstIntegral(kind, d.F, tuple(-g for g in gamma), P0, gamma=gamma, name=name, sources=(name,))


def ratio(a: FirstIntegral, b: FirstIntegral, name: str = "") -> FirstIntegral:
    """``a / b`` for two integrals with equal P0; the time factor cancels."""
    if a.P0 != b.P0:
        raise ValidationError("ratio needs equal P0")
    exps = [x - y for x, y in zip(a.exponents, b.exponents)]
    N = a.numerator * b.denominator
    D = a.denominator * b.numerator
    kind = TIME_INDEPENDENT
    if all(Fraction(e).denominator == 1 for e in exps):
        # fold integer powers into the polynomials
        for i, e in enumerate(exps):
            if e > 0:
                N = N * MultiPoly.var(N.n, i) ** int(e)
            elif e < 0:
                D = D * MultiPoly.var(N.n, i) ** int(-e)
        exps = [Fraction(0)] * len(exps)
        kind = RATIONAL_RATIO
    # normalize so the denominator is monic
    lead = Fraction(D.leading()[1])
    N, D = N * (1 / lead), D * (1 / lead)
    return FirstIntegral(kind, N, tuple(exps), Fraction(0), D, name=name,
                         sources=(a.name, b.name))


def _sample_point(n: int, seed: int):
    rng = random.Random(seed)
    return [Fraction(rng.randint(3, 97), rng.randint(3, 97)) for _ in range(n)]


def independent_subset(integrals: list[FirstIntegral], seed: int = 0) -> list[FirstIntegral]:
    """Greedy maximal subset whose log-gradients are independent at a random rational point."""
    if not integrals:
        return []
    n = integrals[0].n
    q = None
    for k in range(50):
        cand = _sample_point(n, seed + k)
        try:
            if all(I.numerator(cand) != 0 and I.denominator(cand) != 0 for I in integrals):
                q = cand
                break
        except ZeroDivisionError:
            continue
    if q is None:
        raise ValidationError("no usable sample point for the independence test")
    kept, rows = [], []
    for I in integrals:
        g = I.log_gradient(q)
        if exact.rank(rows + [g]) > len(rows):
            rows.append(g)
            kept.append(I)
    return kept


def synthesize_integrals(m: ReducedModel, polys: list[DarbouxPoly], seed: int = 0) -> list[FirstIntegral]:
    """Time-dependent integrals for each non-coordinate Darboux polynomial, then ratios.

    Integral ``I{k}`` comes from the k-th entry of ``polys`` (1-based, so with
    the coordinates listed first the first extra polynomial of a 3-firm
    model gives ``I4``).  Ratios ``I{b}/I{a}`` are formed for pairs with
    equal nonzero P0 and pruned to a functionally independent set together
    with any integral that is already time-independent.
    """
    if not polys:
        return []
    if m.mode != EXACT:
        raise ValidationError("integral synthesis requires an exact model")
    if m.det_beta() == 0:
        raise NotApplicableError("det(beta) = 0; use singular_beta_integral")
    singles = []
    for k, d in enumerate(polys, start=1):
        if d.is_coordinate:
            continue
        singles.append(integral_from_darboux(m, d, name=f"I{k}"))
    ratios = []
    for a, b in combinations(singles, 2):
        if a.P0 == b.P0 and a.P0 != 0:
            ratios.append(ratio(b, a, name=f"{b.name}/{a.name}"))
    static = [I for I in singles if I.P0 == 0] + ratios
    return singles + independent_subset(static, seed)


def time_independent(integrals: list[FirstIntegral]) -> list[FirstIntegral]:
    return [I for I in integrals if I.P0 == 0]


# ------------------------------------------------------------ singular beta


def _primitive(v):
    """Scale a rational vector to coprime integers with positive first nonzero entry."""
    den = math.lcm(*(Fraction(x).denominator for x in v))
    ints = [int(Fraction(x) * den) for x in v]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    first = next(x for x in ints if x)
    return tuple(Fraction(-x if first < 0 else x) for x in ints)


def left_null_vectors(m: ReducedModel) -> list[tuple]:
    return [_primitive(v) for v in exact.nullspace(exact.transpose(m.beta), m.n)]


def singular_beta_integral(m: ReducedModel) -> list[FirstIntegral]:
    """Integrals ``exp(-P0 t) prod q_j^gamma_j`` from left null vectors of beta.

    Since ``gamma beta = 0`` the growth rates satisfy
    ``sum gamma_j qdot_j / q_j = sum gamma_j f_j =: P0``.
    """
    if m.mode != EXACT:
        raise ValidationError("exact model required")
    if m.det_beta() != 0:
        raise NotApplicableError("det(beta) != 0")
    one = MultiPoly.const(m.n, 1)
    out = []
    for k, g in enumerate(left_null_vectors(m), start=1):
        P0 = sum((gi * fi for gi, fi in zip(g, m.f)), Fraction(0))
        kind = TIME_INDEPENDENT if P0 == 0 else TIME_DEPENDENT
        out.append(FirstIntegral(kind, one, g, P0, gamma=g, name=f"J{k}", sources=(f"J{k}",)))
    if len(out) == 2 and out[0].P0 != 0 and out[1].P0 != 0:
        a, b = out
        exps = tuple(b.P0 * x - a.P0 * y for x, y in zip(a.exponents, b.exponents))
        exps = _primitive(exps)
        out.append(FirstIntegral(TIME_INDEPENDENT, one, exps, Fraction(0), name="J1^P0(J2)/J2^P0(J1)",
                                 sources=("J1", "J2")))
    return out


def growth_rate_residual(m: ReducedModel, gamma, Q) -> np.ndarray:
    """``|sum gamma_i qdot_i/q_i - sum gamma_i f_i|`` at each sample row of Q."""
    fm = m.to_float()
    Q = np.asarray(Q, dtype=float)
    rates = np.array(fm.f) + Q @ fm.beta_array().T
    g = np.array([float(x) for x in gamma])
    return np.abs(rates @ g - g @ np.array(fm.f))


# ---------------------------------------------------------- special families


def almost_identical_gamma(m: ReducedModel) -> tuple:
    """Closed form ``gamma_i = (eps_i - 1)/det(beta) * (1 - eps_1 eps_2 eps_3 / eps_i)``.

    This vector is the decomposition for the cofactor of ``q3 * F4`` where
    ``F4 = (eps_1 - 1) q1 - (eps_2 - 1) q2``; it is the same for every cyclic choice.
    """
    _require_family(m, n=3, alpha_one=True)
    e = m.eps
    det = m.det_beta()
    prod = e[0] * e[1] * e[2]
    return tuple((ei - 1) / det * (1 - prod / ei) for ei in e)


def almost_identical_P0(m: ReducedModel):
    _require_family(m, n=3, alpha_one=True)
    e = m.eps
    return (e[0] - 1) * (e[1] - 1) * (e[2] - 1) / m.det_beta() * m.f[0]


def _require_family(m: ReducedModel, n: int | None = None, alpha_one: bool = False):
    if n is not None and m.n != n:
        raise NotApplicableError(f"family formula is stated for n = {n}")
    if len(set(m.f)) != 1 or len(set(m.alpha)) != 1:
        raise NotApplicableError("family needs equal f_i and equal alpha_i")
    if alpha_one and m.alpha[0] != 1:
        raise NotApplicableError("closed form assumes alpha = 1")
    if m.det_beta() == 0:
        raise NotApplicableError("det(beta) = 0")


def family_poly(m: ReducedModel, i: int, j: int) -> DarbouxPoly:
    """``F_ij = (eps_i - alpha) q_i - (eps_j - alpha) q_j`` and its cofactor."""
    a = m.alpha[0]
    w = [Fraction(0)] * m.n
    w[i] = m.eps[i] - a
    w[j] = -(m.eps[j] - a)
    p = [-a] * m.n
    p[i] = -m.eps[i]
    p[j] = -m.eps[j]
    return DarbouxPoly(MultiPoly.linear(w), MultiPoly.linear(p, m.f[0]),
                       ("all f equal", "all alpha equal"))


@dataclass(frozen=True)
class FamilyReport:
    pairs: tuple  # ((i, j), DarbouxPoly, FirstIntegral)
    P0: Fraction
    P0_shared: bool
    P0_closed: Fraction
    P0_printed: Fraction | None
    P0_printed_matches: bool | None
    ratios: tuple
    relation_residual: float | None
    relation_holds: bool | None


def printed_relation(I123: float, eps, alpha=1) -> float:
    """``(alpha - eps1 + I123 (alpha - eps3)) / (I123 (eps2 - alpha))``.

    With alpha = 1 this is the relation between ``I123 = I12/I23`` and
    ``I312 = I31/I12`` as usually quoted.
    """
    e1, e2, e3 = (float(x) for x in eps[:3])
    a = float(alpha)
    return (a - e1 + I123 * (a - e3)) / (I123 * (e2 - a))


def n_firm_family(m: ReducedModel, seed: int = 0) -> FamilyReport:
    """All pairs ``F_ij`` with cofactors, integrals, the shared P0 and ratio checks."""
    _require_family(m)
    n = m.n
    pairs = []
    for i, j in combinations(range(n), 2):
        d = family_poly(m, i, j)
        if cofactor_check(m, d.F) != d.P:
            raise ValidationError(f"F_{i + 1}{j + 1} failed the cofactor check")
        pairs.append(((i, j), d, integral_from_darboux(m, d, name=f"I{i + 1}{j + 1}")))
    P0s = {I.P0 for _, _, I in pairs}
    P0 = pairs[0][2].P0
    a = m.alpha[0]
    closed = -m.f[0] / (1 + a * sum((1 / (e - a) for e in m.eps), Fraction(0)))
    printed = None
    if a == 1:
        prod = Fraction(1)
        for e in m.eps:
            prod *= e - 1
        printed = m.f[0] * prod / m.det_beta()
    ratios = []
    lookup = {ij: I for ij, _, I in pairs}
    if P0 != 0:
        cand = [ratio(b, a, name=f"{b.name}/{a.name}") for a, b in combinations([I for _, _, I in pairs], 2)]
        ratios = independent_subset(cand, seed)
    res = holds = None
    if n >= 3:
        rng = np.random.default_rng(seed)
        I12, I23, I13 = lookup[(0, 1)], lookup[(1, 2)], lookup[(0, 2)]
        worst = 0.0
        for _ in range(5):
            q = rng.uniform(0.2, 2.0, n)
            x = I12.evaluate(q) / I23.evaluate(q)
            # I31 is I13 up to the sign of F
            y = -I13.evaluate(q) / I12.evaluate(q)
            worst = max(worst, abs(y - printed_relation(x, m.eps, a)) / max(1.0, abs(y)))
        res, holds = worst, worst <= 1e-9
    return FamilyReport(tuple(pairs), P0, len(P0s) == 1, closed, printed,
                        None if printed is None else printed == P0, tuple(ratios), res, holds)

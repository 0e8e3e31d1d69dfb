"""Linear stability of critical points.

Characteristic polynomials are computed exactly (Faddeev-LeVerrier) when
the model is exact.  Roots come from closed forms up to degree three and
from companion-matrix eigenvalues (``numpy.roots``) beyond.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .equilibria import CriticalPoint
from .errors import ConsistencyError, DegenerateError, NotApplicableError, ValidationError
from .model import ReducedModel

HYPERBOLIC_TOL = 1e-9
CLUSTER_TOL = 1e-7


def jacobian_at(m: ReducedModel, pt: CriticalPoint | tuple):
    """Jacobian of ``q_i (f_i + sum_k beta_ik q_k)`` at a point.

    ``M_ij = delta_ij (f_i + (beta q)_i) + q_i beta_ij``.
    """
    q = pt.q if isinstance(pt, CriticalPoint) else tuple(pt)
    if q is None:
        raise DegenerateError("cannot linearize at a degenerate point")
    n = m.n
    beta = m.beta
    zero = m.f[0] * 0
    growth = [m.f[i] + sum((beta[i][k] * q[k] for k in range(n)), zero) for i in range(n)]
    return [
        [(growth[i] if i == j else zero) + q[i] * beta[i][j] for j in range(n)]
        for i in range(n)
    ]


def charpoly(M) -> list:
    """Monic characteristic polynomial ``det(lambda I - M)``, highest power first.

    Faddeev-LeVerrier recursion; exact for Fraction input.
    """
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValidationError("matrix is not square")
    is_exact = all(isinstance(x, (Fraction, int)) for row in M for x in row)
    if is_exact:
        A = [[Fraction(x) for x in row] for row in M]
        coeffs = [Fraction(1)]
        Mk = [[Fraction(0)] * n for _ in range(n)]
        c = Fraction(1)
        for k in range(1, n + 1):
            # Mk = A @ Mk_prev + c_prev I
            for i in range(n):
                Mk[i][i] += c
            AM = exact.matmul(A, Mk)
            c = -sum(AM[i][i] for i in range(n)) / k
            coeffs.append(c)
            Mk = AM
        return coeffs
    A = np.array(M, dtype=float)
    return list(np.poly(A)) if n else [1.0]


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _newton(coeffs, z, iters=3):
    p = np.poly1d([complex(c) for c in coeffs])
    dp = p.deriv()
    for _ in range(iters):
        d = dp(z)
        if d == 0:
            break
        step = p(z) / d
        if not np.isfinite(step):
            break
        z = z - step
    return z


def cubic_depressed(coeffs):
    """Depressed-cubic ``p``, ``q`` and discriminant ``q^2/4 + p^3/27`` of a monic cubic."""
    _, m2, m1, m0 = coeffs
    p = m1 - m2 * m2 / 3
    q = 2 * m2**3 / 27 - m2 * m1 / 3 + m0
    return p, q, q * q / 4 + p**3 / 27


def roots_closed_form(coeffs) -> list[complex]:
    """Roots of a monic polynomial of degree 1..3 by radicals."""
    deg = len(coeffs) - 1
    if deg == 1:
        return [complex(-coeffs[1])]
    if deg == 2:
        b, c = coeffs[1], coeffs[2]
        disc = b * b - 4 * c
        if disc == 0:
            r = complex(-b / 2)
            return [r, r]
        s = cmath.sqrt(complex(disc))
        # stable form: avoid cancellation
        r1 = (-complex(b) - s) / 2 if float(b) >= 0 else (-complex(b) + s) / 2
        r2 = complex(c) / r1 if r1 != 0 else (-complex(b) + s) / 2
        return [r1, r2]
    if deg != 3:
        raise ValueError("closed form only up to degree 3")
    p, q, delta = cubic_depressed(coeffs)
    shift = -coeffs[1] / 3
    if delta == 0:
        if p == 0:
            r = complex(shift)
            return [r, r, r]
        simple = 3 * q / p + shift
        double = -3 * q / (2 * p) + shift
        return [complex(simple), complex(double), complex(double)]
    pf, qf, df = float(p), float(q), float(delta)
    sf = float(shift)
    if df > 0:
        sq = math.sqrt(df)
        u = _cbrt(-qf / 2 + sq)
        v = _cbrt(-qf / 2 - sq)
        roots = [complex(u + v + sf),
                 complex(-(u + v) / 2 + sf, math.sqrt(3) * (u - v) / 2),
                 complex(-(u + v) / 2 + sf, -math.sqrt(3) * (u - v) / 2)]
    else:
        r = 2 * math.sqrt(-pf / 3)
        arg = (3 * qf / (2 * pf)) * math.sqrt(-3 / pf)
        theta = math.acos(max(-1.0, min(1.0, arg)))
        roots = [complex(r * math.cos(theta / 3 - 2 * math.pi * k / 3) + sf) for k in range(3)]
    return [_newton(coeffs, z) for z in roots]


def cluster(eigs: list[complex], tol=CLUSTER_TOL) -> list[tuple[complex, int]]:
    """Group eigenvalues closer than ``tol`` (relative) into (mean, multiplicity)."""
    groups: list[list[complex]] = []
    for z in eigs:
        for g in groups:
            ref = g[0]
            if abs(z - ref) <= tol * max(1.0, abs(ref)):
                g.append(z)
                break
        else:
            groups.append([z])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def characteristic_and_eigenvalues(M, cluster_tol=CLUSTER_TOL):
    """Characteristic polynomial (monic, highest power first) and eigenvalues.

    Eigenvalues of a cluster of multiplicity k are reported k times with a
    common value.
    """
    cp = charpoly(M)
    n = len(cp) - 1
    if n == 0:
        return cp, []
    if n <= 3:
        eigs = roots_closed_form(cp)
    else:
        eigs = [complex(z) for z in np.roots([float(c) for c in cp])]
    out = []
    for val, mult in cluster(eigs, cluster_tol):
        if abs(val.imag) <= 1e-12 * max(1.0, abs(val)):
            val = complex(val.real, 0.0)
        out.extend([val] * mult)
    out.sort(key=lambda z: (z.real, z.imag))
    return cp, out


def hurwitz_minors(coeffs) -> list:
    """Leading principal minors of the Hurwitz matrix of ``a0 x^n + ... + an``."""
    a = list(coeffs)
    n = len(a) - 1

    def at(k):
        return a[k] if 0 <= k <= n else 0

    H = [[at(2 * (j + 1) - (i + 1)) for j in range(n)] for i in range(n)]
    is_exact = all(isinstance(x, (Fraction, int)) for x in a)
    minors = []
    for k in range(1, n + 1):
        sub = [row[:k] for row in H[:k]]
        minors.append(exact.det(sub) if is_exact else float(np.linalg.det(np.array(sub, dtype=float))))
    return minors


def routh_hurwitz(coeffs):
    """Routh-Hurwitz test for a monic polynomial, highest power first.

    Returns ``(passed, conditions)`` with conditions as ``(name, value, ok)``.
    For a cubic ``m3 l^3 + m2 l^2 + m1 l + m0`` the conditions are the four
    coefficient signs and ``m2 m1 > m3 m0``.
    """
    n = len(coeffs) - 1
    conds = []
    if n == 3:
        m3, m2, m1, m0 = coeffs
        for name, v in (("m3 > 0", m3), ("m2 > 0", m2), ("m1 > 0", m1), ("m0 > 0", m0)):
            conds.append((name, v, v > 0))
        v = m2 * m1 - m3 * m0
        conds.append(("m2*m1 > m3*m0", v, v > 0))
    else:
        for k, c in enumerate(coeffs):
            conds.append((f"a{k} > 0", c, c > 0))
        for k, mnr in enumerate(hurwitz_minors(coeffs), start=1):
            conds.append((f"hurwitz minor {k} > 0", mnr, mnr > 0))
    return all(ok for _, _, ok in conds), conds


def classify(eigs: list[complex], norm: float) -> str:
    thresh = HYPERBOLIC_TOL * max(norm, 1e-300)
    re = [z.real for z in eigs]
    if any(abs(r) < thresh for r in re):
        if all(abs(r) < thresh and abs(z.imag) > thresh for r, z in zip(re, eigs)):
            return "center-like"
        return "non-hyperbolic"
    if all(r < 0 for r in re):
        if all(abs(z.imag) <= thresh for z in eigs):
            return "stable node"
        return "stable focus-node"
    if all(r > 0 for r in re):
        return "unstable"
    return "saddle"


@dataclass(frozen=True)
class StabilityReport:
    point: CriticalPoint
    jacobian: list
    charpoly: list
    eigenvalues: list
    discriminant: object
    routh_hurwitz_pass: bool
    routh_hurwitz_conditions: list
    classification: str

    @property
    def multiplicities(self):
        return cluster(self.eigenvalues)


def analyze_point(m: ReducedModel, pt: CriticalPoint, cluster_tol=CLUSTER_TOL) -> StabilityReport:
    M = jacobian_at(m, pt)
    cp, eigs = characteristic_and_eigenvalues(M, cluster_tol)
    disc = cubic_depressed(cp)[2] if len(cp) == 4 else None
    passed, conds = routh_hurwitz(cp)
    norm = float(np.linalg.norm(np.array(M, dtype=float), 2))
    return StabilityReport(pt, M, cp, eigs, disc, passed, conds, classify(eigs, norm))


# ------------------------------------------------------------------ Lyapunov


@dataclass(frozen=True)
class LyapunovCertificate:
    A: list
    K: list
    p_trace: object
    q_det: object
    sampled_negativity_radius: float
    max_sampled_vdot: float


def lyapunov_matrix(A):
    """Closed-form solution of ``A^T K + K A = -I`` for a 2x2 matrix."""
    (a11, a12), (a21, a22) = A
    p = a11 + a22
    q = a11 * a22 - a12 * a21
    s = -1 / (2 * p * q)
    off = -a11 * a21 - a12 * a22
    K = [[s * (a21 * a21 + a22 * a22 + q), s * off],
         [s * off, s * (a11 * a11 + a12 * a12 + q)]]
    return K, p, q


def _vdot_samples(m: ReducedModel, pt, K, r, n_rad=100, n_ang=100):
    i, j = pt.support
    Kf = np.array(K, dtype=float)
    rad = r * np.arange(1, n_rad + 1) / n_rad
    ang = 2 * np.pi * np.arange(n_ang) / n_ang
    R, T = np.meshgrid(rad, ang, indexing="ij")
    x = np.stack([R.ravel() * np.cos(T.ravel()), R.ravel() * np.sin(T.ravel())], axis=1)
    f = np.array(m.f, dtype=float)
    beta = m.beta_array()
    qstar = np.array([float(v) for v in pt.q])
    Q = np.tile(qstar, (len(x), 1))
    Q[:, i] += x[:, 0]
    Q[:, j] += x[:, 1]
    full = Q * (f + Q @ beta.T)
    xdot = full[:, [i, j]]
    return 2 * np.einsum("ki,ij,kj->k", x, Kf, xdot)


def lyapunov_duopoly(m: ReducedModel, pt: CriticalPoint) -> LyapunovCertificate:
    """Quadratic Lyapunov function ``V = x^T K x`` at a duopoly point.

    The returned radius is the largest ``r`` (halving from the distance to
    the nearest axis) for which ``dV/dt < 0`` on a 100x100 polar grid of
    points with ``0 < |x| <= r``.
    """
    if pt.q is None or len(pt.support) != 2:
        raise NotApplicableError("a duopoly (support of size 2) point is required")
    i, j = pt.support
    M = jacobian_at(m, pt)
    A = [[M[i][i], M[i][j]], [M[j][i], M[j][j]]]
    p = A[0][0] + A[1][1]
    q = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if not (p < 0 and q > 0):
        raise NotApplicableError(f"need tr A < 0 and det A > 0, got p={p}, q={q}")
    K, p, q = lyapunov_matrix(A)
    if not (K[0][0] > 0 and K[0][0] * K[1][1] - K[0][1] * K[1][0] > 0):
        raise ConsistencyError("Lyapunov matrix is not positive definite")
    r = float(min(abs(pt.q[i]), abs(pt.q[j])))
    if r == 0:
        r = 1.0
    for _ in range(60):
        vd = _vdot_samples(m, pt, K, r)
        if vd.max() < 0:
            return LyapunovCertificate(A, K, p, q, r, float(vd.max()))
        r /= 2
    raise ConsistencyError("no radius with negative dV/dt found")


# ------------------------------------------------------------------ Poincare


def poincare_obstruction(eigs, n_max: int = 25, tol: float = 1e-9):
    """Search for non-negative integer resonances ``sum n_i lambda_i = 0``.

    Returns ``("resonant", witness)`` for the first witness in order of
    increasing ``sum n_i``, ``("obstructed", None)`` if no witness exists and
    all eigenvalues are real with a common sign, else ``("inconclusive", None)``.
    """
    lam = np.array([complex(z) for z in eigs])
    if n_max < 1:
        raise ValidationError("n_max must be >= 1")
    scale = float(np.abs(lam).max()) or 1.0
    if np.any(np.abs(lam.real) < HYPERBOLIC_TOL * scale):
        raise NotApplicableError("point is not hyperbolic")
    k = len(lam)
    for total in range(1, n_max + 1):
        for vec in _compositions(total, k):
            s = complex(np.dot(vec, lam))
            if abs(s) <= tol * total * scale:
                return "resonant", tuple(vec)
    real = np.all(np.abs(lam.imag) <= HYPERBOLIC_TOL * scale)
    if real and (np.all(lam.real > 0) or np.all(lam.real < 0)):
        return "obstructed", None
    return "inconclusive", None


def _compositions(total: int, k: int):
    """Non-negative integer vectors of length k summing to ``total``, lex descending."""
    if k == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, k - 1):
            yield (first, *rest)


def poincare_at(m: ReducedModel, pt: CriticalPoint, n_max: int = 25):
    _, eigs = characteristic_and_eigenvalues(jacobian_at(m, pt))
    return poincare_obstruction(eigs, n_max)


__all__ = [
    "jacobian_at", "charpoly", "characteristic_and_eigenvalues", "routh_hurwitz",
    "hurwitz_minors", "classify", "StabilityReport", "analyze_point",
    "LyapunovCertificate", "lyapunov_matrix", "lyapunov_duopoly",
    "poincare_obstruction", "poincare_at", "cubic_depressed", "roots_closed_form",
]

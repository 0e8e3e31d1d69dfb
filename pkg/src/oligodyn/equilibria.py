"""Critical points of the reduced model, one per support subset of firms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact
from .errors import DegenerateError, ValidationError
from .model import EXACT, ReducedModel, vector_field

MAX_FIRMS = 20
FLOAT_TOL = 1e-10
COINCIDENCE_TOL = 1e-9

# paper-style names for n = 3, keyed by support bitmask
E_LABELS_3 = {0b000: "E1", 0b001: "E2", 0b010: "E3", 0b100: "E4",
              0b011: "E5", 0b110: "E6", 0b101: "E7", 0b111: "E8"}


@dataclass(frozen=True)
class CriticalPoint:
    """Equilibrium solved on a fixed support.

    ``support`` is the candidate index set whose equations were solved;
    coordinates off the support are exactly zero.  A degenerate point has
    ``q = None``.
    """

    support: tuple
    q: tuple | None
    label: str
    admissible: bool
    coincides_with: tuple = field(default=())

    @property
    def bitmask(self) -> int:
        return sum(1 << i for i in self.support)

    @property
    def degenerate(self) -> bool:
        return self.q is None

    def e_label(self, n: int) -> str | None:
        return E_LABELS_3.get(self.bitmask) if n == 3 else None


def support_label(support: tuple, n: int) -> str:
    k = len(support)
    names = ",".join(str(i + 1) for i in support)
    if k == 0:
        return "origin"
    if k == n:
        return "full-oligopoly"
    if k == 1:
        return f"monopoly({names})"
    if k == 2:
        return f"duopoly({names})"
    return f"oligopoly({names})"


def solve_on_support(m: ReducedModel, support: tuple):
    """Solve ``f_i + sum_{j in S} beta_ij q_j = 0`` for i in S.

    Returns the full coordinate tuple or raises DegenerateError.
    """
    n = m.n
    if not support:
        return tuple(m.f[0] * 0 for _ in range(n))
    beta = m.beta
    sub = [[beta[i][j] for j in support] for i in support]
    rhs = [-m.f[i] for i in support]
    if m.mode == EXACT:
        qs = exact.solve(sub, rhs)
        zero = Fraction(0)
    else:
        a = np.array(sub, dtype=float)
        if abs(np.linalg.det(a)) <= 1e-12 * max(1.0, np.abs(a).max()) ** len(support):
            raise DegenerateError(f"singular system on support {support}")
        qs = np.linalg.solve(a, np.array(rhs, dtype=float)).tolist()
        zero = 0.0
    q = [zero] * n
    for i, v in zip(support, qs):
        q[i] = v
    return tuple(q)


def enumerate_critical_points(m: ReducedModel) -> list[CriticalPoint]:
    """All 2^n support candidates in bitmask order, with coincidences flagged."""
    n = m.n
    if n > MAX_FIRMS:
        raise ValidationError(f"support enumeration is capped at n <= {MAX_FIRMS}")
    raw = []
    for mask in range(1 << n):
        support = tuple(i for i in range(n) if mask >> i & 1)
        try:
            q = solve_on_support(m, support)
        except DegenerateError:
            raw.append((support, None, "degenerate", False))
            continue
        raw.append((support, q, support_label(support, n), all(x >= 0 for x in q)))

    points = []
    for k, (support, q, label, adm) in enumerate(raw):
        same = []
        if q is not None:
            for j, (s2, q2, _, _) in enumerate(raw):
                if j == k or q2 is None:
                    continue
                if m.mode == EXACT:
                    hit = q == q2
                else:
                    hit = max(abs(x - y) for x, y in zip(q, q2)) <= COINCIDENCE_TOL
                if hit:
                    same.append(sum(1 << i for i in s2))
        points.append(CriticalPoint(support, q, label, adm, tuple(same)))
    return points


def residual(m: ReducedModel, pt: CriticalPoint):
    """Max-norm of the vector field at the point."""
    v = vector_field(m, pt.q)
    return max(abs(x) for x in v)


def full_point(m: ReducedModel) -> CriticalPoint:
    """The interior (all firms active) critical point."""
    return enumerate_critical_points(m)[-1]


def find_point(points: list[CriticalPoint], key: str | int, n: int) -> CriticalPoint:
    """Look up a point by bitmask (int or digit string) or by E-label for n = 3."""
    if isinstance(key, str) and key.upper().startswith("E"):
        for p in points:
            if p.e_label(n) == key.upper():
                return p
        raise ValidationError(f"unknown point label {key!r}")
    mask = int(key, 0) if isinstance(key, str) else int(key)
    for p in points:
        if p.bitmask == mask:
            return p
    raise ValidationError(f"no point with support bitmask {mask}")


def e8_numerators(m: ReducedModel) -> tuple:
    """Sign-normalized Cramer numerators of the interior point and the determinant.

    ``q_i* = num_i / det``.  Returned as ``(nums, det)``.
    """
    if m.n != 3:
        raise ValidationError("admissibility cases are defined for n = 3")
    beta = m.beta
    if m.mode == EXACT:
        d = exact.det(beta)
    else:
        d = float(np.linalg.det(np.array(beta, dtype=float)))
    nums = []
    for i in range(3):
        mat = [list(row) for row in beta]
        for r in range(3):
            mat[r][i] = -m.f[r]
        nums.append(exact.det(mat) if m.mode == EXACT else float(np.linalg.det(np.array(mat, dtype=float))))
    return tuple(nums), d


def admissibility_case(m: ReducedModel) -> str:
    """Classify where the interior equilibrium sits: ``I``, ``IIa``, ``IIb`` or ``other``.

    I: all three coordinates positive.  IIa: exactly one is non-positive.
    IIb: exactly one is positive.
    """
    nums, d = e8_numerators(m)
    if d == 0:
        raise DegenerateError("interior equilibrium is degenerate (zero denominator)")
    signs = [x * d for x in nums]  # same sign as q_i*
    pos = sum(1 for s in signs if s > 0)
    if pos == 3:
        return "I"
    if pos == 2:
        return "IIa"
    if pos == 1:
        return "IIb"
    return "other"

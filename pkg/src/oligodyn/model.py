"""Cournot oligopoly model with bounded-rationality adjustment.

Two parameterizations are provided:

* :class:`OligopolyModel` holds the economic parameters (linear inverse
  demand ``p = a - b Q`` and quadratic costs ``c_i + d_i q_i + e_i q_i^2``)
  and the gradient adjustment ``dq_i/dt = alpha_i q_i dPi_i/dq_i``.
* :class:`ReducedModel` is the Lotka-Volterra form obtained after rescaling
  time by ``b``::

      dq_i/dt = q_i (f_i + sum_j beta_ij q_j)

A model is uniformly *exact* (``fractions.Fraction``) or *float*.  Python
ints are accepted in either mode.  Mixing Fractions with floats raises
:class:`~oligodyn.errors.ScalarModeError`.
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DecoupledSystemError, ScalarModeError, ValidationError

EXACT = "exact"
FLOAT = "float"


def scalar_mode(values) -> str:
    """Return ``"exact"`` or ``"float"`` for a collection of numbers.

    Ints are neutral; a collection made only of ints is exact.
    """
    has_float = has_frac = False
    for v in values:
        if isinstance(v, bool):
            raise ValidationError(f"boolean is not a scalar: {v!r}")
        if isinstance(v, (int, np.integer)):
            continue
        if isinstance(v, Fraction):
            has_frac = True
        elif isinstance(v, (float, np.floating)):
            has_float = True
        else:
            raise ValidationError(f"unsupported scalar type {type(v).__name__}")
    if has_float and has_frac:
        raise ScalarModeError("exact rationals and floats cannot be mixed")
    return FLOAT if has_float else EXACT


def coerce(values, mode: str) -> tuple:
    """Convert ``values`` to a tuple of Fractions or floats."""
    if mode == EXACT:
        return tuple(Fraction(v) for v in values)
    out = tuple(float(v) for v in values)
    if not all(np.isfinite(out)):
        raise ValidationError("non-finite value")
    return out


def parse_scalar(token) -> Fraction:
    """Parse ``"p/q"``, ``"3"`` or ``"0.25"`` into an exact Fraction."""
    try:
        return Fraction(str(token).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"cannot parse rational {token!r}") from exc


def fmt_scalar(x) -> str:
    """Canonical text form: ``p/q`` for rationals, ``repr`` for floats."""
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _state(q, n: int, mode: str) -> tuple:
    q = tuple(q)
    if len(q) != n:
        raise ValidationError(f"state has {len(q)} entries, model has n={n}")
    qmode = scalar_mode(q)
    if mode == EXACT and qmode == FLOAT:
        raise ScalarModeError("float state passed to an exact model")
    if mode == FLOAT and any(isinstance(v, Fraction) for v in q):
        raise ScalarModeError("exact state passed to a float model")
    return coerce(q, mode)


@dataclass(frozen=True)
class OligopolyModel:
    """Economic parameters of an n-firm Cournot market.

    ``c`` is the fixed cost; it enters profits but never the dynamics.
    Negative ``e_i`` are accepted (``economically_viable`` is then False)
    because singular-interaction constructions need them.
    """

    a: object
    b: object
    c: tuple
    d: tuple
    e: tuple
    alpha: tuple

    def __post_init__(self):
        n = len(self.alpha)
        if n < 2:
            raise ValidationError("at least two firms are required")
        for name in ("c", "d", "e"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"'{name}' has {len(getattr(self, name))} entries, expected {n}")
        allvals = [self.a, self.b, *self.c, *self.d, *self.e, *self.alpha]
        mode = scalar_mode(allvals)
        object.__setattr__(self, "a", coerce([self.a], mode)[0])
        object.__setattr__(self, "b", coerce([self.b], mode)[0])
        for name in ("c", "d", "e", "alpha"):
            object.__setattr__(self, name, coerce(getattr(self, name), mode))
        if self.b == 0:
            raise DecoupledSystemError("b = 0: firms decouple, no market interaction")
        if self.a <= 0 or self.b < 0:
            raise ValidationError("a and b must be positive")
        if any(al <= 0 for al in self.alpha):
            raise ValidationError("adjustment speeds alpha_i must be positive")

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def mode(self) -> str:
        return EXACT if isinstance(self.b, Fraction) else FLOAT

    @property
    def a_i(self) -> tuple:
        return tuple(self.a - d for d in self.d)

    @property
    def b_i(self) -> tuple:
        return tuple(self.b + e for e in self.e)

    @property
    def economically_viable(self) -> bool:
        return (
            all(c > 0 for c in self.c)
            and all(d > 0 for d in self.d)
            and all(e >= 0 for e in self.e)
            and all(ai > 0 for ai in self.a_i)
        )

    def to_float(self) -> "OligopolyModel":
        f = lambda xs: tuple(float(x) for x in xs)  # noqa: E731
        return OligopolyModel(float(self.a), float(self.b), f(self.c), f(self.d), f(self.e), f(self.alpha))

    @classmethod
    def identical(cls, n, a, b, c, d, e, alpha=1) -> "OligopolyModel":
        return cls(a, b, (c,) * n, (d,) * n, (e,) * n, (alpha,) * n)


@dataclass(frozen=True)
class ReducedModel:
    """Rescaled model ``dq_i/dt = q_i (f_i + sum_j beta_ij q_j)``.

    ``beta`` has ``-eps_i`` on the diagonal and ``-alpha_i`` elsewhere in
    row i.
    """

    f: tuple
    eps: tuple
    alpha: tuple

    def __post_init__(self):
        n = len(self.f)
        if n < 2:
            raise ValidationError("at least two firms are required")
        if len(self.eps) != n or len(self.alpha) != n:
            raise ValidationError("f, eps and alpha must have equal length")
        mode = scalar_mode([*self.f, *self.eps, *self.alpha])
        for name in ("f", "eps", "alpha"):
            object.__setattr__(self, name, coerce(getattr(self, name), mode))

    @property
    def n(self) -> int:
        return len(self.f)

    @property
    def mode(self) -> str:
        return EXACT if isinstance(self.f[0], Fraction) else FLOAT

    @property
    def beta(self) -> tuple:
        n = self.n
        return tuple(
            tuple(-self.eps[i] if i == j else -self.alpha[i] for j in range(n)) for i in range(n)
        )

    def beta_array(self) -> np.ndarray:
        return np.array(self.beta, dtype=float)

    def det_beta(self):
        from .exact import det

        if self.mode == EXACT:
            return det(self.beta)
        return float(np.linalg.det(self.beta_array()))

    def to_float(self) -> "ReducedModel":
        return ReducedModel(*(tuple(float(x) for x in v) for v in (self.f, self.eps, self.alpha)))

    def permuted(self, perm: Sequence[int]) -> "ReducedModel":
        """Relabel firms: new firm k is old firm ``perm[k]``."""
        return ReducedModel(*(tuple(v[p] for p in perm) for v in (self.f, self.eps, self.alpha)))

    @classmethod
    def identical(cls, n, f, eps, alpha=1) -> "ReducedModel":
        return cls((f,) * n, (eps,) * n, (alpha,) * n)

    @property
    def is_equal_f_alpha(self) -> bool:
        """True when all f_i coincide and all alpha_i coincide (almost-identical firms)."""
        return len(set(self.f)) == 1 and len(set(self.alpha)) == 1

    def rhs(self):
        """Fast float right-hand side ``q -> q * (f + beta q)`` for integration.

        Works on a single state of shape (n,) or a batch of shape (k, n).
        """
        f = np.array(self.f, dtype=float)
        beta_t = self.beta_array().T

        def field(t, q):
            return q * (f + q @ beta_t)

        return field


def total_supply_and_price(m: OligopolyModel, q):
    """Total supply ``Q = sum q_i`` and market price ``p = a - b Q``."""
    q = _state(q, m.n, m.mode)
    Q = sum(q, m.b * 0)
    return Q, m.a - m.b * Q


def profit_and_marginal(m: OligopolyModel, q, i: int):
    """Profit of firm ``i`` and its marginal profit ``dPi_i/dq_i``.

    Uses the per-firm fixed cost ``c_i``.
    """
    if not 0 <= i < m.n:
        raise ValidationError(f"firm index {i} out of range 0..{m.n - 1}")
    q = _state(q, m.n, m.mode)
    Q, price = total_supply_and_price(m, q)
    profit = q[i] * price - (m.c[i] + m.d[i] * q[i] + m.e[i] * q[i] ** 2)
    marginal = m.a - m.b * Q - m.b * q[i] - m.d[i] - 2 * m.e[i] * q[i]
    return profit, marginal


def vector_field(m, q) -> tuple:
    """Evaluate dq/dt for either parameterization.

    For an :class:`OligopolyModel` this is the raw time; for a
    :class:`ReducedModel` it is the rescaled time, so the raw field equals
    ``b`` times the reduced one.
    """
    q = _state(q, m.n, m.mode)
    if isinstance(m, OligopolyModel):
        out = []
        for i in range(m.n):
            _, marginal = profit_and_marginal(m, q, i)
            out.append(m.alpha[i] * q[i] * marginal)
        return tuple(out)
    if isinstance(m, ReducedModel):
        beta = m.beta
        return tuple(
            q[i] * (m.f[i] + sum((beta[i][j] * q[j] for j in range(m.n)), q[i] * 0))
            for i in range(m.n)
        )
    raise ValidationError(f"not a model: {type(m).__name__}")


def reduce(m: OligopolyModel) -> ReducedModel:
    """Rescale time by ``b`` and return ``f_i``, ``eps_i`` and ``alpha_i``.

    ``f_i = alpha_i (a - d_i) / b`` and ``eps_i = 2 alpha_i (b + e_i) / b``.
    """
    if m.b == 0:
        raise DecoupledSystemError("b = 0: firms decouple, no rescaling possible")
    f = tuple(al * ai / m.b for al, ai in zip(m.alpha, m.a_i))
    eps = tuple(2 * al * bi / m.b for al, bi in zip(m.alpha, m.b_i))
    return ReducedModel(f, eps, m.alpha)


def expand(r: ReducedModel, a, b, c=None) -> OligopolyModel:
    """Rebuild an :class:`OligopolyModel` with given ``a``, ``b`` that reduces to ``r``."""
    c = c if c is not None else (1,) * r.n
    d = tuple(a - fi * b / al for fi, al in zip(r.f, r.alpha))
    e = tuple(ei * b / (2 * al) - b for ei, al in zip(r.eps, r.alpha))
    return OligopolyModel(a, b, tuple(c), d, e, r.alpha)


# ---------------------------------------------------------------- model files


def model_from_dict(data) -> OligopolyModel:
    """Build a model from the JSON object layout.

    ``{"n": 3, "a": ..., "b": ..., "firms": [{"c", "d", "e", "alpha"}, ...]}``.
    JSON numbers select float mode, ``"p/q"`` strings exact mode.
    """
    if not isinstance(data, dict):
        raise ValidationError("model file must contain a JSON object")
    for key in ("n", "a", "b", "firms"):
        if key not in data:
            raise ValidationError(f"missing key '{key}'")
    n, firms = data["n"], data["firms"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValidationError("'n' must be an integer")
    if not isinstance(firms, list) or not firms:
        raise ValidationError("'firms' must be a non-empty list")
    if len(firms) != n:
        raise ValidationError(f"'n' is {n} but {len(firms)} firms are listed")
    if not 2 <= n <= 20:
        raise ValidationError(f"n={n} out of range 2..20")

    raw = [data["a"], data["b"]]
    for k, firm in enumerate(firms):
        if not isinstance(firm, dict):
            raise ValidationError(f"firm {k} is not an object")
        for key in ("c", "d", "e", "alpha"):
            if key not in firm:
                raise ValidationError(f"firm {k} lacks '{key}'")
            raw.append(firm[key])
    kinds = set()
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, (str, numbers.Real)):
            raise ValidationError(f"bad scalar {v!r}")
        kinds.add(str if isinstance(v, str) else float)
    if len(kinds) > 1:
        raise ScalarModeError("model file mixes JSON numbers and 'p/q' strings")
    conv = parse_scalar if kinds == {str} else float

    def col(key):
        return tuple(conv(firm[key]) for firm in firms)

    return OligopolyModel(conv(data["a"]), conv(data["b"]), col("c"), col("d"), col("e"), col("alpha"))


def load_model(path) -> OligopolyModel:
    """Read a model file; JSON syntax errors report line and column."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read model file: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(data)


def model_to_dict(m: OligopolyModel) -> dict:
    enc = fmt_scalar if m.mode == EXACT else float
    return {
        "n": m.n,
        "a": enc(m.a),
        "b": enc(m.b),
        "firms": [
            {"c": enc(c), "d": enc(d), "e": enc(e), "alpha": enc(al)}
            for c, d, e, al in zip(m.c, m.d, m.e, m.alpha)
        ],
    }

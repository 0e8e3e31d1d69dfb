"""Trajectories, conservation and attraction checks, line dynamics and leaf reduction."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .darboux import DarbouxPoly
from .equilibria import full_point
from .errors import DomainError, NotApplicableError, ValidationError
from .integrals import FirstIntegral, RATIONAL_RATIO, decompose_cofactor
from .integrate import dopri5
from .model import EXACT, ReducedModel
from .poly import MultiPoly

DRIFT_TOL = 1e-6


def worker_count() -> int:
    """Thread cap from ``OLIGODYN_THREADS`` (default: CPU count)."""
    env = os.environ.get("OLIGODYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError("OLIGODYN_THREADS must be an integer") from None
    return os.cpu_count() or 1


def _float(m: ReducedModel) -> ReducedModel:
    return m.to_float() if m.mode == EXACT else m


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (len(times), n)
    diagnostics: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def add_diagnostic(self, name: str, values):
        self.diagnostics[name] = np.asarray(values, dtype=float)

    def to_csv(self) -> str:
        n = self.states.shape[1]
        names = list(self.diagnostics)
        lines = [",".join(["t"] + [f"q_{i + 1}" for i in range(n)] + names)]
        for k, t in enumerate(self.times):
            row = [repr(float(t))] + [repr(float(x)) for x in self.states[k]]
            row += [repr(float(self.diagnostics[c][k])) for c in names]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def _check_tol(tol):
    if not 1e-12 <= tol <= 1e-3:
        raise ValidationError("tol must lie in [1e-12, 1e-3]")


def integrate(m: ReducedModel, q0, t_end: float, tol: float = 1e-9, t_eval=None,
              samples: int = 201, diagnostics=None) -> Trajectory:
    """Integrate one trajectory from ``q0`` (closed positive orthant) to ``t_end``.

    ``diagnostics`` maps names to FirstIntegral or MultiPoly objects that are
    evaluated at the sample times only.
    """
    _check_tol(tol)
    fm = _float(m)
    q0 = np.asarray(q0, dtype=float)
    if q0.shape != (fm.n,):
        raise ValidationError(f"initial state must have {fm.n} entries")
    if np.any(q0 < 0) or not np.all(np.isfinite(q0)):
        raise ValidationError("initial state must be finite and in the closed positive orthant")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, samples)
    sol = dopri5(fm.rhs(), 0.0, q0, float(t_end), tol, tol, t_eval=t_eval)
    traj = Trajectory(sol.t, sol.y)
    for name, obj in (diagnostics or {}).items():
        if isinstance(obj, FirstIntegral):
            try:
                traj.add_diagnostic(name, obj.evaluate_batch(sol.y, sol.t))
            except DomainError:
                traj.add_diagnostic(name, np.full(len(sol.t), np.nan))
        else:
            traj.add_diagnostic(name, obj.evaluator()(sol.y))
    return traj


def integrate_batch(m: ReducedModel, Q0, t_end: float, tol: float = 1e-9, t_eval=None, chunk: int = 50):
    """Integrate many initial states; returns ``(times, states)`` with states (k, len(times), n)."""
    _check_tol(tol)
    fm = _float(m)
    Q0 = np.atleast_2d(np.asarray(Q0, dtype=float))
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, 201)
    rhs = fm.rhs()
    parts = [Q0[i:i + chunk] for i in range(0, len(Q0), chunk)]

    def run(part):
        return dopri5(rhs, 0.0, part, float(t_end), tol, tol, t_eval=t_eval).y

    with ThreadPoolExecutor(max_workers=min(worker_count(), len(parts))) as pool:
        ys = list(pool.map(run, parts))
    return np.asarray(t_eval), np.concatenate([np.swapaxes(y, 0, 1) for y in ys], axis=0)


def random_initial_states(m: ReducedModel, count: int, seed: int) -> np.ndarray:
    """Uniform draws from ``[0.1, 2 max q*_i]^n`` with ``q*`` the interior point."""
    pt = full_point(_float(m))
    upper = 2.0 * max(float(x) for x in pt.q) if pt.q is not None else 2.0
    upper = max(upper, 0.2)
    rng = np.random.default_rng(seed)
    return rng.uniform(0.1, upper, size=(count, m.n))


# ------------------------------------------------------------ conservation


@dataclass(frozen=True)
class ConservationReport:
    name: str
    initial: float
    max_relative_drift: float
    passed: bool


def verify_conservation(traj: Trajectory, I: FirstIntegral, tol: float = DRIFT_TOL) -> ConservationReport:
    """Max relative drift of ``I`` over the samples; DomainError if it is undefined there."""
    vals = I.evaluate_batch(traj.states, traj.times)
    ref = vals[0]
    if ref == 0:
        drift = float(np.abs(vals).max())
    else:
        drift = float(np.abs(vals - ref).max() / abs(ref))
    return ConservationReport(I.name, float(ref), drift, drift <= tol)


# ------------------------------------------------------------ attraction


def central_direction(m: ReducedModel) -> np.ndarray:
    """Unit vector along the line ``q_i = q4 / (eps_i - alpha)``."""
    fm = _float(m)
    a = fm.alpha[0]
    v = np.array([1.0 / (e - a) for e in fm.eps])
    return v / np.linalg.norm(v)


def distance_to_line(m: ReducedModel, Q) -> np.ndarray:
    u = central_direction(m)
    Q = np.asarray(Q, dtype=float)
    along = Q @ u
    return np.linalg.norm(Q - along[..., None] * u, axis=-1)


@dataclass(frozen=True)
class AttractionReport:
    trials: int
    seed: int
    t_end: float
    P0: float
    passed: int
    worst_decay: float
    max_line_distance: float
    max_e8_distance: float
    all_passed: bool


def verify_attraction(m: ReducedModel, family: list[DarbouxPoly], trials: int = 100,
                      t_end: float = 50.0, seed: int = 0, tol: float = 1e-10,
                      decay: float = 1e-4, e8_tol: float = 1e-4) -> AttractionReport:
    """Check that every family polynomial decays and trajectories reach E8.

    A trial passes when ``|F(q(t_end))| <= decay * |F(q(0))|`` (or both are
    below 1e-8) for every F, and the final state is within ``e8_tol`` of E8.
    """
    if m.mode != EXACT:
        raise ValidationError("pass the exact model; it is converted internally")
    fam = [d for d in family if not d.is_coordinate]
    if not fam:
        raise NotApplicableError("no non-coordinate Darboux polynomials supplied")
    if len(set(m.f)) != 1 or len(set(m.alpha)) != 1:
        raise NotApplicableError("attraction test needs equal f_i and equal alpha_i")
    _, P0 = decompose_cofactor(m, fam[0].P)
    if P0 >= 0:
        raise NotApplicableError("attraction needs P0 < 0")
    Q0 = random_initial_states(m, trials, seed)
    times, Y = integrate_batch(m, Q0, t_end, tol, t_eval=np.array([0.0, t_end]))
    start, end = Y[:, 0, :], Y[:, -1, :]
    ok = np.ones(trials, dtype=bool)
    worst = 0.0
    for d in fam:
        ev = d.F.evaluator()
        a, b = np.abs(ev(start)), np.abs(ev(end))
        small = (a < 1e-8) & (b < 1e-8)
        ratio = np.where(a > 0, b / np.where(a > 0, a, 1.0), 0.0)
        ok &= small | (b <= decay * a)
        worst = max(worst, float(ratio.max()))
    e8 = np.array([float(x) for x in full_point(_float(m)).q])
    dist_e8 = np.linalg.norm(end - e8, axis=1)
    ok &= dist_e8 <= e8_tol
    line = distance_to_line(m, end)
    return AttractionReport(trials, seed, t_end, float(P0), int(ok.sum()), worst,
                            float(line.max()), float(dist_e8.max()), bool(ok.all()))


# ------------------------------------------------------------ line dynamics


@dataclass(frozen=True)
class LineDynamics:
    """Logistic motion ``q4' = f q4 (1 - q4/q4*)`` on the central line."""

    q4_star: float
    f: float
    q4_star_printed: float | None
    e8_distance: float
    matched: str
    samples: tuple | None = None

    def point(self, q4: float, m: ReducedModel) -> np.ndarray:
        return q4 * np.array([1.0 / (e - m.alpha[0]) for e in _float(m).eps])

    def closed_form(self, t, q40: float):
        t = np.asarray(t, dtype=float)
        if q40 == 0:
            return np.zeros_like(t)
        return self.q4_star / (1 + (self.q4_star / q40 - 1) * np.exp(-self.f * t))


def line_dynamics(m: ReducedModel, q40: float | None = None, t_end: float = 10.0) -> LineDynamics:
    """q4* on the central line, cross-checked against the enumerated E8.

    The general bracket is ``1 + alpha * sum_k 1/(eps_k - alpha)``; for three
    firms with alpha = 1 this equals the asymmetric form
    ``1/(eps_1-1) + 1/(eps_2-1) + eps_3/(eps_3-1)``, which is computed
    separately and compared.
    """
    fm = _float(m)
    if len(set(fm.f)) != 1 or len(set(fm.alpha)) != 1:
        raise NotApplicableError("line dynamics needs equal f_i and equal alpha_i")
    a, f = fm.alpha[0], fm.f[0]
    q4s = f / (1 + a * sum(1 / (e - a) for e in fm.eps))
    printed = None
    if fm.n == 3 and a == 1:
        e1, e2, e3 = fm.eps
        printed = f / (1 / (e1 - 1) + 1 / (e2 - 1) + e3 / (e3 - 1))
    e8 = np.array([float(x) for x in full_point(fm).q])
    on_line = q4s * np.array([1 / (e - a) for e in fm.eps])
    dist = float(np.abs(on_line - e8).max())
    if dist > 1e-6:
        matched = "none"
    elif printed is not None and abs(printed - q4s) <= 1e-9 * max(1.0, abs(q4s)):
        matched = "printed bracket"
    else:
        matched = "general bracket"
    samples = None
    if q40 is not None:
        rhs = lambda t, y: f * y * (1 - y / q4s)
        ts = np.linspace(0, t_end, 101)
        sol = dopri5(rhs, 0.0, np.array([q40]), t_end, 1e-12, 1e-12, t_eval=ts)
        samples = (sol.t, sol.y[:, 0])
    return LineDynamics(q4s, f, printed, dist, matched, samples)


# ------------------------------------------------------------ leaf reduction


def leaf_integral(m: ReducedModel) -> FirstIntegral:
    """``I1 = q3 F4 / (q1 F5)`` with ``F4 = x1 q1 - x2 q2``, ``F5 = x2 q2 - x3 q3``, ``x_i = eps_i - alpha``."""
    if m.n != 3 or len(set(m.f)) != 1 or len(set(m.alpha)) != 1:
        raise NotApplicableError("leaf reduction needs three firms with equal f_i and alpha_i")
    a = m.alpha[0]
    x = [e - a for e in m.eps]
    q1, q2, q3 = (MultiPoly.var(3, i) for i in range(3))
    F4 = q1 * x[0] - q2 * x[1]
    F5 = q2 * x[1] - q3 * x[2]
    zero = tuple(0 * x[0] for _ in range(3))
    return FirstIntegral(RATIONAL_RATIO, q3 * F4, zero, 0 * x[0], q1 * F5, name="I1")


@dataclass
class LeafSystem:
    """Planar field on the leaf ``I1 = C``, with q3 recovered by ``Q3(q1, q2)``."""

    model: ReducedModel
    C: float

    def Q3(self, q1, q2):
        fm = _float(self.model)
        a = fm.alpha[0]
        x1, x2, x3 = (e - a for e in fm.eps)
        q1 = np.asarray(q1, dtype=float)
        q2 = np.asarray(q2, dtype=float)
        den = -x2 * q2 + (x1 + self.C * x3) * q1
        if np.any(np.abs(den) <= 1e-14 * (np.abs(q1) + np.abs(q2) + 1)):
            raise DomainError("leaf denominator vanishes")
        return self.C * x2 * q1 * q2 / den

    def field(self, t, y):
        fm = _float(self.model)
        q1, q2 = y[..., 0], y[..., 1]
        q3 = self.Q3(q1, q2)
        Q = np.stack([q1, q2, q3], axis=-1)
        full = fm.rhs()(t, Q)
        return full[..., :2]

    def lift(self, Y2) -> np.ndarray:
        Y2 = np.asarray(Y2, dtype=float)
        return np.stack([Y2[..., 0], Y2[..., 1], self.Q3(Y2[..., 0], Y2[..., 1])], axis=-1)


def reduce_on_leaf(m: ReducedModel, C: float) -> LeafSystem:
    leaf_integral(m)  # precondition check
    return LeafSystem(m, float(C))


def lift_project_deviation(m: ReducedModel, q0, t_end: float = 10.0, tol: float = 1e-11) -> float:
    """Sup-norm gap between the lifted planar solution and the 3-D solution from ``q0``."""
    I1 = leaf_integral(m)
    C = I1.evaluate(q0)
    leaf = reduce_on_leaf(m, C)
    ts = np.linspace(0.0, t_end, 201)
    full = dopri5(_float(m).rhs(), 0.0, np.asarray(q0, float), t_end, tol, tol, t_eval=ts).y
    planar = dopri5(leaf.field, 0.0, np.asarray(q0[:2], float), t_end, tol, tol, t_eval=ts).y
    return float(np.abs(leaf.lift(planar) - full).max())

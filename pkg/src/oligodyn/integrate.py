"""Dormand-Prince 5(4) integrator with PI step control and dense output.

The state may be a single vector of shape (n,) or a batch of shape (k, n);
a batch shares one step size, and the error norm is the worst over the batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# fifth-order minus embedded fourth-order weights
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# quartic continuous extension; row s gives the coefficients of theta^1..theta^4
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
FAC_MIN, FAC_MAX = 0.2, 10.0
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA
CLAMP = 1e-14


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray  # shape (len(t),) + state shape
    n_steps: int
    n_rejected: int


def _norm(e, scale):
    r = (e / scale) ** 2
    if r.ndim == 1:
        return float(np.sqrt(r.mean()))
    return float(np.sqrt(r.mean(axis=-1)).max())


def _initial_step(fun, t0, y0, f0, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0, d1 = _norm(y0, scale), _norm(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = fun(t0 + h0, y0 + h0 * f0)
    d2 = _norm(f1 - f0, scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1)


def dopri5(fun, t0: float, y0, t_end: float, rtol: float = 1e-9, atol: float = 1e-9,
           t_eval=None, clamp: bool = True, max_steps: int = 1_000_000) -> Solution:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t_end``.

    Without ``t_eval`` every accepted step is returned; with it, the quartic
    dense output is sampled at those times.  When ``clamp`` is set, entries
    with ``|y| < 1e-14`` are set to exactly zero after each step.

    Raises:
        IntegrationError: on step-size underflow or a non-finite state; the
            exception carries the last good time and state.
    """
    y = np.array(y0, dtype=float)
    if not np.all(np.isfinite(y)):
        raise IntegrationError("non-finite initial state", t0, y)
    if t_end < t0:
        raise ValueError("t_end must not precede t0")
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if np.any(np.diff(t_eval) < 0) or (t_eval.size and (t_eval[0] < t0 or t_eval[-1] > t_end)):
            raise ValueError("t_eval must be sorted and lie in [t0, t_end]")
    t = float(t0)
    f = fun(t, y)
    out_t, out_y = [], []
    if t_eval is None:
        out_t.append(t)
        out_y.append(y.copy())
    else:
        k_eval = 0
        while k_eval < len(t_eval) and t_eval[k_eval] == t:
            out_t.append(t)
            out_y.append(y.copy())
            k_eval += 1
    if t_end == t0:
        return Solution(np.array(out_t), np.array(out_y), 0, 0)

    h = min(_initial_step(fun, t, y, f, rtol, atol), t_end - t)
    err_prev = 1e-4
    steps = rejected = 0
    K = np.empty((7,) + y.shape)
    while t < t_end:
        if steps >= max_steps:
            raise IntegrationError("maximum number of steps exceeded", t, y)
        if h < 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", t, y)
        h = min(h, t_end - t)
        K[0] = f
        for s in range(1, 6):
            dy = sum(a * K[j] for j, a in enumerate(_A[s]))
            K[s] = fun(t + _C[s] * h, y + h * dy)
        y_new = y + h * np.tensordot(_B[:6], K[:6], axes=1)
        f_new = fun(t + h, y_new)
        K[6] = f_new
        if not np.all(np.isfinite(y_new)):
            h *= 0.25
            rejected += 1
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _norm(h * np.tensordot(_E, K, axes=1), scale)
        if err <= 1.0:
            t_new = t + h if t + h < t_end else t_end
            if clamp:
                small = np.abs(y_new) < CLAMP
                if small.any():
                    y_new = np.where(small, 0.0, y_new)
                    f_new = fun(t_new, y_new)
            if t_eval is not None:
                Q = np.tensordot(_P.T, K, axes=([1], [0]))  # (4,) + shape
                while k_eval < len(t_eval) and t_eval[k_eval] <= t_new:
                    th = (t_eval[k_eval] - t) / h
                    powers = th ** np.arange(1, 5)
                    out_t.append(t_eval[k_eval])
                    out_y.append(y + h * np.tensordot(powers, Q, axes=1))
                    k_eval += 1
            else:
                out_t.append(t_new)
                out_y.append(y_new.copy())
            t, y, f = t_new, y_new, f_new
            steps += 1
            fac = SAFETY * max(err, 1e-10) ** -ALPHA * err_prev ** BETA
            h *= min(FAC_MAX, max(FAC_MIN, fac))
            err_prev = max(err, 1e-4)
        else:
            rejected += 1
            h *= max(FAC_MIN, SAFETY * err ** -ALPHA)
    if t_eval is not None:
        out_y = [np.where(np.abs(v) < CLAMP, 0.0, v) if clamp else v for v in out_y]
    return Solution(np.array(out_t), np.array(out_y), steps, rejected)

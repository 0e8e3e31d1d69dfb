"""Level surfaces of a first integral by marching tetrahedra on a regular grid."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .integrals import FirstIntegral

# Kuhn split of the unit cube into six tetrahedra sharing the main diagonal 0-7.
# Corner k has offset (k & 1, k >> 1 & 1, k >> 2 & 1).
_TETS = [(0, 1, 3, 7), (0, 3, 2, 7), (0, 2, 6, 7), (0, 6, 4, 7), (0, 4, 5, 7), (0, 5, 1, 7)]
_OFFSETS = np.array([(k & 1, k >> 1 & 1, k >> 2 & 1) for k in range(8)])


@dataclass
class Mesh:
    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (F, 3) int
    value: float

    def to_json(self) -> str:
        return json.dumps({"value": self.value, "vertices": self.vertices.tolist(),
                           "faces": self.faces.tolist()}, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["kind,a,b,c"]
        lines += [f"v,{x!r},{y!r},{z!r}" for x, y, z in self.vertices.tolist()]
        lines += [f"f,{i},{j},{k}" for i, j, k in self.faces.tolist()]
        return "\n".join(lines) + "\n"


def _field(integral: FirstIntegral, value: float):
    """Pole-free scalar field whose zero set is ``integral = value`` in the open orthant.

    With integer exponents this is ``N * q^+ - value * D * q^-``; otherwise
    the integral itself minus the value.
    """
    if integral.P0 != 0:
        raise ValidationError("level sets need a time-independent integral")
    exps = [float(e) for e in integral.exponents]
    N = integral.numerator.evaluator()
    D = integral.denominator.evaluator()
    if all(e == int(e) for e in exps):
        pos = np.array([max(e, 0) for e in exps])
        neg = np.array([max(-e, 0) for e in exps])
        return lambda Q: N(Q) * np.prod(Q ** pos, -1) - value * D(Q) * np.prod(Q ** neg, -1)

    def g(Q):
        return integral.evaluate_batch(Q.reshape(-1, 3)).reshape(Q.shape[:-1]) - value
    return g


def marching_tetrahedra(values: np.ndarray, axes) -> tuple[np.ndarray, np.ndarray]:
    """Zero surface of ``values`` sampled on the grid ``axes`` (three 1-D arrays)."""
    nx, ny, nz = values.shape
    if min(nx, ny, nz) < 2:
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=int)
    ax = [np.asarray(a, dtype=float) for a in axes]
    idx = np.stack(np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), np.arange(nz - 1), indexing="ij"), -1).reshape(-1, 3)
    flat = lambda c: (c[:, 0] * ny + c[:, 1]) * nz + c[:, 2]
    corner_ids = np.stack([flat(idx + off) for off in _OFFSETS], 1)  # (cubes, 8)
    vals = values.reshape(-1)
    grid_ids = np.stack(np.unravel_index(np.arange(vals.size), values.shape), -1)
    pos = np.stack([ax[0][grid_ids[:, 0]], ax[1][grid_ids[:, 1]], ax[2][grid_ids[:, 2]]], -1)

    edge_vertex = {}
    verts, faces = [], []

    def vertex(a, b):
        key = (a, b) if a < b else (b, a)
        k = edge_vertex.get(key)
        if k is None:
            va, vb = vals[a], vals[b]
            s = va / (va - vb) if va != vb else 0.5
            verts.append(pos[a] + s * (pos[b] - pos[a]))
            k = edge_vertex[key] = len(verts) - 1
        return k

    for tet in _TETS:
        ids = corner_ids[:, tet]  # (cubes, 4)
        inside = vals[ids] < 0
        count = inside.sum(1)
        for c in np.nonzero((count > 0) & (count < 4))[0]:
            v = ids[c]
            ins = [v[k] for k in range(4) if inside[c, k]]
            out = [v[k] for k in range(4) if not inside[c, k]]
            if len(ins) == 1 or len(out) == 1:
                lone, rest = (ins[0], out) if len(ins) == 1 else (out[0], ins)
                faces.append([vertex(lone, r) for r in rest])
            else:
                a, b = ins
                c1, d = out
                p, q, r, s = vertex(a, c1), vertex(a, d), vertex(b, d), vertex(b, c1)
                faces.append([p, q, r])
                faces.append([p, r, s])
    if not faces:
        return np.zeros((0, 3)), np.zeros((0, 3), dtype=int)
    return np.array(verts), np.array(faces, dtype=int)


def export_levelset(m, integral: FirstIntegral, value: float, grid: int = 64,
                    bounds: tuple[float, float] | None = None) -> Mesh:
    """Mesh of ``integral = value`` over ``[lo, hi]^3`` with ``grid`` points per axis.

    The box must lie in the open positive orthant; by default it spans
    ``[0.02, 2] * max(q*)`` around the interior equilibrium.
    """
    if integral.n != 3:
        raise ValidationError("level-set export is for three firms")
    if bounds is None:
        from .equilibria import full_point

        fm = m.to_float() if m.mode == "exact" else m
        pt = full_point(fm)
        top = 2.0 * max(float(x) for x in pt.q) if pt.q is not None else 2.0
        top = top if top > 0 else 2.0
        bounds = (0.01 * top, top)
    lo, hi = (float(b) for b in bounds)
    if not 0 < lo < hi:
        raise DomainError("the integral is undefined off the open positive orthant")
    if grid < 2:
        return Mesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int), float(value))
    axis = np.linspace(lo, hi, grid)
    Q = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), -1)
    vals = _field(integral, float(value))(Q)
    verts, faces = marching_tetrahedra(vals, (axis, axis, axis))
    return Mesh(verts, faces, float(value))

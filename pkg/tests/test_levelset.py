import json

import numpy as np
import pytest

from oligodyn.darboux import search_darboux
from oligodyn.dynamics import leaf_integral
from oligodyn.errors import DomainError, ValidationError
from oligodyn.integrals import synthesize_integrals
from oligodyn.levelset import export_levelset, marching_tetrahedra


def test_sphere_vertices_lie_on_surface():
    axis = np.linspace(-1.5, 1.5, 25)
    X = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), -1)
    verts, faces = marching_tetrahedra((X**2).sum(-1) - 1.0, (axis, axis, axis))
    r = np.linalg.norm(verts, axis=1)
    assert len(faces) > 100 and np.abs(r - 1).max() < 0.02
    assert faces.max() < len(verts)


def test_levelset_of_leaf_integral(almost_identical):
    I1 = leaf_integral(almost_identical)
    mesh = export_levelset(almost_identical, I1, 1.0, grid=32)
    assert len(mesh.faces) > 0
    vals = I1.evaluate_batch(mesh.vertices)
    assert np.median(np.abs(vals - 1.0)) < 0.05
    doc = json.loads(mesh.to_json())
    assert doc["value"] == 1.0 and len(doc["faces"]) == len(mesh.faces)
    rows = mesh.to_csv().splitlines()
    assert rows[0] == "kind,a,b,c" and sum(r.startswith("f,") for r in rows) == len(mesh.faces)


def test_levelset_needs_static_integral(symmetric):
    I4 = synthesize_integrals(symmetric, search_darboux(symmetric, 1))[0]
    with pytest.raises(ValidationError):
        export_levelset(symmetric, I4, 0.5, grid=24)


def test_levelset_edge_cases(almost_identical):
    I1 = leaf_integral(almost_identical)
    assert len(export_levelset(almost_identical, I1, 1.0, grid=1).faces) == 0
    with pytest.raises(DomainError):
        export_levelset(almost_identical, I1, 1.0, grid=8, bounds=(0.0, 1.0))


def test_zero_level_contains_plane(almost_identical):
    I1 = leaf_integral(almost_identical)
    mesh = export_levelset(almost_identical, I1, 0.0, grid=24)
    x1, x2 = (float(e) - 1 for e in almost_identical.eps[:2])
    F4 = x1 * mesh.vertices[:, 0] - x2 * mesh.vertices[:, 1]
    assert len(mesh.faces) > 0
    # vertices come from linear interpolation of q3 * F4, so allow one cell of slack
    lo, hi = mesh.vertices.min(), mesh.vertices.max()
    h = (hi - lo) / 23
    assert np.abs(F4).max() <= h * (x1 + x2)
    assert np.median(np.abs(F4)) < 1e-12

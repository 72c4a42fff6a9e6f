"""Smoke tests for the python bindings: build a tiny shape in memory and run
the main operations end to end."""

import math

import numpy as np
import pytest

import eigenmatch as em


def icosahedron():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int32,
    )
    return verts, faces


def bumpy(verts):
    out = verts.copy()
    r = 1.0 + 0.2 * np.sin(3.0 * verts[:, 0]) + 0.1 * np.cos(2.0 * verts[:, 1])
    return out * r[:, None]


@pytest.fixture(scope="module")
def shape():
    verts, faces = icosahedron()
    mesh = em.TriMesh(bumpy(verts), faces)
    basis = em.compute_basis(mesh, 8)
    sig = em.hks_derivative_signature(basis, 3, 8)
    return mesh, basis, sig


def test_version():
    assert em.__version__


def test_mesh_and_operators(shape):
    mesh, basis, _ = shape
    assert mesh.vertex_count == 12
    assert mesh.face_count == 20
    areas = em.vertex_areas(mesh)
    assert areas.shape == (12,)
    assert np.all(areas > 0)
    assert abs(areas.sum() - em.face_areas(mesh).sum()) < 1e-9

    w = em.cotan_matrix(mesh)
    ones = np.ones(12)
    assert np.abs(w @ ones).max() < 1e-12

    normals = em.face_normals(mesh)
    assert np.allclose(np.linalg.norm(normals, axis=1), 1.0)

    grads = em.face_gradient(mesh, mesh.vertices[:, 0].copy())
    assert grads.shape == (20, 3)


def test_basis_properties(shape):
    _, basis, _ = shape
    lam = basis.eigenvalues
    assert lam[0] <= 1e-8 * lam[1]
    phi = basis.eigenfunctions
    gram = phi.T @ (basis.mass[:, None] * phi)
    assert np.abs(gram - np.eye(8)).max() < 1e-8

    h = em.hks(basis, 0.5)
    assert np.all(h > 0)
    d = em.diffusion_distance(basis, 0.3, 0, 5, 6)
    assert d > 0
    assert em.diffusion_distance(basis, 0.3, 5, 0, 6) == d
    coords = em.diffusion_map(basis, 0.0, 6)
    assert np.array_equal(coords, phi[:, :6])


def test_self_match_and_points(shape):
    mesh, basis, sig = shape
    moments = em.compute_moment_set(mesh, basis, sig, 4)
    assert moments.alpha > 0
    assert moments.mu.shape == (16, 4)  # flattened (N*N, N)

    result = em.match_moment_sets(moments, moments)
    assert result.params.perm == [0, 1, 2, 3]
    assert result.params.signs == [1, 1, 1, 1]
    assert result.cost.total == 0.0

    stack = em.apply_match(basis, result.params, 4)
    field = em.descriptor_field(basis, stack, sig, beta=0.5)
    src = em.farthest_point_sample(mesh, 4)
    matches = em.match_points(src, field, field)
    for pm, s in zip(matches, src):
        assert pm.src == s
        assert pm.dst == s
        assert pm.distance == 0.0


def test_errors_are_typed():
    verts = np.zeros((3, 3))
    faces = np.array([[0, 1, 2]], dtype=np.int32)
    with pytest.raises(em.EigenmatchError):
        em.TriMesh(verts, faces)  # degenerate (all vertices coincide)


def test_colored_export(tmp_path, shape):
    mesh, basis, _ = shape
    out = tmp_path / "colored.ply"
    em.export_colored_ply(str(out), mesh, basis.eigenfunctions[:, 1].copy())
    text = out.read_text()
    assert text.startswith("ply")
    assert "property uchar red" in text

import numpy as np
import pytest

import jsonio
from errors import DimensionMismatch, InputError, NotPositiveSemidefinite
from numkit import (
    as_matrix,
    eig_min,
    gram_factor,
    op_norm,
    polar_mesh,
    psd_project,
    random_contraction,
    random_unitary,
    solve_on_span,
)

K_WORKED = np.array([[0.5, 0.5, 0.5], [0.5, 0.75, 0.25], [0.5, 0.25, 0.75]])


def test_as_matrix_promotes_scalars_and_freezes():
    M = as_matrix(2.5)
    assert M.shape == (1, 1)
    assert M.dtype == np.complex128
    with pytest.raises(ValueError):
        M[0, 0] = 1


def test_as_matrix_rejects_vectors_and_nan():
    with pytest.raises(DimensionMismatch):
        as_matrix([1.0, 2.0])
    with pytest.raises(InputError):
        as_matrix([[np.nan]])


def test_op_norm():
    assert op_norm(np.zeros((0, 0))) == 0.0
    assert op_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0)
    assert op_norm(np.array([[0, 2j], [0, 0]])) == pytest.approx(2.0)


def test_eig_min_and_psd_project():
    H = np.diag([2.0, -1.0])
    assert eig_min(H) == pytest.approx(-1.0)
    P = psd_project(H)
    assert np.allclose(P, np.diag([2.0, 0.0]))
    assert np.allclose(psd_project(K_WORKED), K_WORKED, atol=1e-14)


def test_op_norm_is_unitarily_invariant(rng):
    for n in (1, 3, 6):
        M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        U, W = random_unitary(n, rng), random_unitary(n, rng)
        assert abs(op_norm(U @ M @ W) - op_norm(M)) <= 1e-10


def test_psd_project_is_idempotent_on_random_hermitian(rng):
    for _ in range(20):
        G = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        P = psd_project(G + G.conj().T)
        assert eig_min(P) >= -1e-12
        assert np.allclose(psd_project(P), P, atol=1e-12)


def test_gram_factor_recovers_rank_two_certificate():
    U = gram_factor(K_WORKED)
    assert U.shape == (2, 3)
    assert np.allclose(U.conj().T @ U, K_WORKED, atol=1e-12)
    assert np.linalg.svd(U, compute_uv=False)[0] ** 2 == pytest.approx(1.5)


def test_worked_gram_factor_fixture(load_fixture):
    U = jsonio.decode_matrix(load_fixture("worked_U.json")["U"], "U")
    assert np.allclose(U.conj().T @ U, K_WORKED, atol=1e-14)
    assert U.shape == gram_factor(K_WORKED).shape


def test_gram_factor_rejects_indefinite():
    with pytest.raises(NotPositiveSemidefinite):
        gram_factor(np.diag([1.0, -1.0]))


def test_gram_factor_zero_matrix_has_rank_zero():
    assert gram_factor(np.zeros((2, 2))).shape == (0, 2)


def test_solve_on_span_maps_isometric_families(rng):
    Q = random_unitary(4, rng)
    X = Q[:, :2]
    W = random_unitary(4, rng)
    Y = W[:, :2]
    span = solve_on_span(X, Y)
    assert np.allclose(span.matrix @ X, Y, atol=1e-12)
    assert span.gram_residual < 1e-12
    assert span.warning is None
    assert op_norm(span.matrix) <= 1 + 1e-12


def test_solve_on_span_clips_and_warns():
    span = solve_on_span(np.array([[1.0]]), np.array([[2.0]]))
    assert span.clipped == pytest.approx(1.0)
    assert span.matrix[0, 0] == pytest.approx(1.0)
    assert span.warning is not None


def test_solve_on_span_rejects_column_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_on_span(np.zeros((2, 2)), np.zeros((2, 3)))


def test_random_contraction_hits_requested_norm(rng):
    M = random_contraction(3, 5, rng, norm=0.7)
    assert op_norm(M) == pytest.approx(0.7)
    assert random_contraction(0, 3, rng).shape == (0, 3)


def test_random_unitary_is_unitary(rng):
    for n in (1, 2, 5):
        U = random_unitary(n, rng)
        assert np.allclose(U @ U.conj().T, np.eye(n), atol=1e-12)


def test_polar_mesh():
    mesh = polar_mesh(10, 0.9)
    assert mesh.size == 1 + 10 * (2 - 1)
    assert mesh[0] == 0
    assert np.max(np.abs(mesh)) == pytest.approx(0.9)
    assert polar_mesh(41).size == 1 + 41 * 7
    with pytest.raises(InputError):
        polar_mesh(1)

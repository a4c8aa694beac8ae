import numpy as np
import pytest

from detrep import (
    DetRep,
    KBlocks,
    block_matrix,
    from_K,
    g_rep_to_d2_rep,
    quadratic_pencil_value,
    rep_for,
    sigma_e_target,
    strict_rescale,
    verify,
)
from errors import DimensionMismatch, InputError, NotContractive
from factories import random_G_point, random_kblocks
from numkit import op_norm
from poly2 import Coords, DetForm, Domain, coefficient_residual, compose_sym, det_poly, det_value, no_roots_grid


@pytest.fixture
def kblocks(rng):
    return [random_kblocks(rng) for _ in range(50)]


def test_detrep_validation():
    with pytest.raises(DimensionMismatch):
        DetRep(DetForm.G, np.eye(2), np.eye(3))
    with pytest.raises(DimensionMismatch):
        DetRep(DetForm.G, np.ones((2, 3)), np.ones((2, 3)))
    with pytest.raises(InputError):
        DetRep(DetForm.G, np.eye(2), np.eye(2), constant=0)
    with pytest.raises(InputError):
        DetRep(DetForm.SIGMAE, np.eye(2), np.eye(2))


def test_kblocks_validation_and_views():
    K = np.arange(9, dtype=float).reshape(3, 3) / 20
    k = KBlocks(K, 1, 2)
    assert k.K11.shape == (1, 1)
    assert k.K12.shape == (1, 2)
    assert k.K22.shape == (2, 2)
    with pytest.raises(DimensionMismatch):
        KBlocks(K, 2, 2)


def test_from_K_scalar_case():
    rep = from_K(KBlocks([[0.6]], 1, 0))
    assert rep.size == 1
    f = det_poly(rep, DetForm.G)
    # q(sigma) = 1 - 0.6 sigma with sigma = s / 2
    assert np.allclose(f.coeffs, [[1], [-0.3]], atol=1e-14)


def test_from_K_rejects_expanding_blocks():
    with pytest.raises(NotContractive) as info:
        from_K(KBlocks([[1.5]], 1, 0))
    assert info.value.norm == pytest.approx(1.5)


def test_from_K_sizes_and_norms(kblocks):
    for k in kblocks:
        rep = from_K(k)
        assert rep.form == DetForm.G
        assert rep.size == k.n + 2 * k.m
        assert op_norm(rep.A1 + rep.A2) <= 1 + 1e-12
        assert op_norm(rep.A1 - rep.A2) <= 1 + 1e-12
        assert op_norm(rep.A1 + rep.A2) == pytest.approx(k.norm, rel=1e-12)


def test_from_K_matches_substituted_sigma_e_determinant(kblocks):
    for k in kblocks:
        report = verify(from_K(k), sigma_e_target(k))
        assert report.residual <= 1e-9


def test_quadratic_pencil_agrees_with_linearization(kblocks, rng):
    for k in kblocks[:20]:
        rep = from_K(k)
        for _ in range(5):
            s, p = random_G_point(rng)
            direct = quadratic_pencil_value(k, s, p)
            assert direct == pytest.approx(det_value(rep, DetForm.G, s, p), rel=1e-10, abs=1e-12)


def test_d2_determinant_is_composed_g_determinant(kblocks):
    for k in kblocks:
        rep = from_K(k)
        d2 = det_poly(g_rep_to_d2_rep(rep), DetForm.D2)
        g = det_poly(rep, DetForm.G)
        assert coefficient_residual(d2, compose_sym(g).cleaned()) <= 1e-9


def test_strictly_rescaled_reps_have_no_roots_on_closed_bidisk(kblocks):
    for k in kblocks:
        rep = strict_rescale(g_rep_to_d2_rep(from_K(k)), 1.25)
        assert op_norm(block_matrix(rep)) <= 0.8 + 1e-12
        scan = no_roots_grid(det_poly(rep, DetForm.D2), Domain.CLOSED_BIDISK, 51)
        assert scan.min_modulus > 0


def test_strict_rescale_scales_pencil():
    rep = DetRep(DetForm.G, [[0.8]], [[0.2]])
    small = strict_rescale(rep, 2.0)
    assert np.allclose(small.A1, [[0.4]])
    assert verify(small, det_poly(small, DetForm.G)).strict
    with pytest.raises(InputError):
        strict_rescale(rep, 1.0)


def test_verify_reports_norms_and_rejects_wrong_coords():
    rep = DetRep(DetForm.D2, [[0.5]], [[0.5]])
    target = det_poly(rep, DetForm.D2)
    report = verify(rep, target)
    assert report.residual <= 1e-14
    assert report.norm_sum == pytest.approx(1.0)
    assert report.norm_diff == pytest.approx(0.0)
    assert report.block_norm == pytest.approx(1.0)
    assert report.classification == "boundary"
    assert not report.strict
    with pytest.raises(InputError):
        verify(rep, det_poly(DetRep(DetForm.G, [[0.5]], [[0.5]]), DetForm.G))


def test_block_norm_is_max_of_sum_and_difference_norms(rng):
    for ell in (1, 2, 3, 5):
        for _ in range(10):
            A1 = rng.normal(size=(ell, ell)) + 1j * rng.normal(size=(ell, ell))
            A2 = rng.normal(size=(ell, ell)) + 1j * rng.normal(size=(ell, ell))
            rep = DetRep(DetForm.G, A1 * 0.3, A2 * 0.3)
            report = verify(rep, det_poly(rep, DetForm.G))
            assert report.norm_sum == pytest.approx(op_norm(rep.A1 + rep.A2), abs=1e-12)
            assert report.norm_diff == pytest.approx(op_norm(rep.A1 - rep.A2), abs=1e-12)
            assert abs(report.block_norm - max(report.norm_sum, report.norm_diff)) <= 1e-10


def test_verify_detects_wrong_target():
    rep = DetRep(DetForm.G, [[0.5]], [[0.1]])
    wrong = det_poly(DetRep(DetForm.G, [[0.4]], [[0.1]]), DetForm.G)
    assert verify(rep, wrong).residual > 0.05


def test_rep_for_resolves_forms():
    k = KBlocks([[0.5, 0.1], [0.0, 0.3]], 1, 1)
    assert rep_for(k, DetForm.SIGMAE) is k
    assert rep_for(k, DetForm.G).form == DetForm.G
    assert rep_for(k, DetForm.D2).form == DetForm.D2
    rep = from_K(k)
    assert rep_for(rep, DetForm.D2).form == DetForm.D2
    with pytest.raises(InputError):
        rep_for(rep, DetForm.SIGMAE)


def test_sigma_e_target_is_in_sp_coords():
    k = KBlocks([[0.5, 0.1], [0.0, 0.3]], 1, 1)
    f = sigma_e_target(k)
    assert f.coords == Coords.SP
    s, p = 0.3 + 0.1j, 0.05j
    assert f(s, p) == pytest.approx(quadratic_pencil_value(k, s, p), rel=1e-12)

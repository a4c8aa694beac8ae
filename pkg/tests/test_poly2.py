import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from detrep import DetRep, KBlocks
from errors import InputError
from factories import random_poly, random_sp_poly
from poly2 import (
    Coords,
    DetForm,
    Domain,
    Poly2,
    change_sigma_e,
    coefficient_residual,
    compose_sym,
    convert,
    det_poly,
    det_value,
    eval_poly,
    is_symmetric,
    no_roots_grid,
    power_sums,
    substitute,
    swap,
    symmetric_average,
    to_sp_basis,
)

Z2_PLUS_ZETA2 = Poly2(Coords.ZZETA, [[0, 0, 1], [0, 0, 0], [1, 0, 0]])


def test_construction_trims_trailing_zeros():
    f = Poly2(Coords.SP, [[1, 0, 0], [2, 0, 0], [0, 0, 0]])
    assert f.deg == (1, 0)
    assert Poly2(Coords.SP, [[0, 0]]).is_zero()


def test_construction_rejects_bad_coeffs():
    with pytest.raises(InputError):
        Poly2(Coords.SP, np.zeros((0, 0)))
    with pytest.raises(InputError):
        Poly2(Coords.SP, [[np.inf]])


def test_arithmetic():
    s = Poly2.monomial(1, 0, Coords.SP)
    p = Poly2.monomial(0, 1, Coords.SP)
    f = (s + 1) * (s - 1)
    assert np.array_equal(f.coeffs, np.array([[-1], [0], [1]]))
    assert np.array_equal((s * p * 2).coeffs, np.array([[0, 0], [0, 2]]))
    assert np.array_equal((s ** 2 - p * 2).coeffs, np.array([[0, -2], [0, 0], [1, 0]]))
    assert np.array_equal(((s * 4) / 2).coeffs, (s * 2).coeffs)
    with pytest.raises(InputError):
        s + Poly2.monomial(1, 0, Coords.ZZETA)


def test_eval_matches_direct_formula():
    f = Poly2(Coords.ZZETA, [[1, 2j], [3, 0]])
    z, zeta = 0.3 - 0.1j, -0.2 + 0.5j
    assert eval_poly(f, z, zeta) == pytest.approx(1 + 2j * zeta + 3 * z)
    grid = f(np.array([z, 0.0]), np.array([zeta, 0.0]))
    assert grid.shape == (2,)
    assert grid[1] == pytest.approx(1.0)


def test_swap_and_symmetry(rng):
    f = random_poly(rng, Coords.ZZETA, 2, 3)
    assert not is_symmetric(f)
    g = symmetric_average(f)
    assert is_symmetric(g)
    z, zeta = 0.2 + 0.1j, -0.4j
    assert g(z, zeta) == pytest.approx((f(z, zeta) + f(zeta, z)) / 2)
    assert swap(f)(z, zeta) == pytest.approx(f(zeta, z))


def test_substitute_matches_evaluation(rng):
    f = random_poly(rng, Coords.SP, 2, 2)
    X = random_poly(rng, Coords.SP, 1, 1)
    Y = random_poly(rng, Coords.SP, 2, 0)
    h = substitute(f, X, Y)
    s, p = 0.3 + 0.2j, -0.1 + 0.4j
    assert h(s, p) == pytest.approx(f(X(s, p), Y(s, p)))


def test_power_sums():
    h = power_sums(3)
    assert np.array_equal(h[0].coeffs, [[2]])
    assert np.array_equal(h[2].coeffs, np.array([[0, -2], [0, 0], [1, 0]]))
    # z^3 + zeta^3 = s^3 - 3 s p
    assert np.array_equal(h[3].coeffs, np.array([[0, 0], [0, -3], [0, 0], [1, 0]]))


def test_power_sums_compose_to_z_k_plus_zeta_k():
    for k, h in enumerate(power_sums(8)):
        expected = np.zeros((k + 1, k + 1))
        expected[k, 0] += 1
        expected[0, k] += 1
        assert coefficient_residual(compose_sym(h), Poly2(Coords.ZZETA, expected)) <= 1e-12


def test_newton_identity_fixture():
    g = convert(Z2_PLUS_ZETA2, Coords.SP)
    assert g.coords == Coords.SP
    assert np.array_equal(g.coeffs, np.array([[0, -2], [0, 0], [1, 0]]))
    assert np.array_equal(compose_sym(g).coeffs, Z2_PLUS_ZETA2.coeffs)


def test_to_sp_basis_rejects_asymmetric():
    with pytest.raises(InputError):
        to_sp_basis(Poly2.monomial(1, 0, Coords.ZZETA))


def test_compose_then_recover_is_identity(rng):
    for _ in range(100):
        g = random_sp_poly(rng, 4, 4)
        back = to_sp_basis(compose_sym(g))
        assert coefficient_residual(back, g) <= 1e-12


@given(
    st.lists(
        st.lists(st.integers(min_value=-5, max_value=5), min_size=3, max_size=3),
        min_size=3,
        max_size=3,
    )
)
@settings(max_examples=50, deadline=None)
def test_integer_polynomials_survive_basis_round_trip(rows):
    g = Poly2(Coords.SP, rows)
    assert coefficient_residual(to_sp_basis(compose_sym(g)), g) <= 1e-12
    assert coefficient_residual(change_sigma_e(change_sigma_e(g, Coords.SIGMAE), Coords.SP), g) <= 1e-12


def test_sigma_e_substitution():
    # sigma^2 - e = s^2/4 - (s^2/4 - p) = p
    f = Poly2(Coords.SIGMAE, [[0, -1], [0, 0], [1, 0]])
    g = change_sigma_e(f, Coords.SP)
    assert np.allclose(g.coeffs, [[0, 1]])
    with pytest.raises(InputError):
        change_sigma_e(Z2_PLUS_ZETA2, Coords.SP)


def test_convert_routes_through_sp():
    f = convert(Z2_PLUS_ZETA2, Coords.SIGMAE)
    assert f.coords == Coords.SIGMAE
    back = convert(f, Coords.ZZETA)
    assert coefficient_residual(back, Z2_PLUS_ZETA2) <= 1e-14


def test_det_poly_scalar_pencils():
    a, b = 0.4, 0.3j
    rep_d2 = DetRep(DetForm.D2, [[a]], [[b]])
    rep_g = DetRep(DetForm.G, [[a]], [[b]])
    # 1 - a z - a zeta + (a^2 - b^2) z zeta
    expected_d2 = np.array([[1, -a], [-a, a * a - b * b]])
    assert np.allclose(det_poly(rep_d2, DetForm.D2).coeffs, expected_d2, atol=1e-14)
    # 1 - a s + (a^2 - b^2) p
    expected_g = np.array([[1, a * a - b * b], [-a, 0]])
    assert np.allclose(det_poly(rep_g, DetForm.G).coeffs, expected_g, atol=1e-14)


def test_det_poly_agrees_with_direct_determinant(rng):
    A1 = rng.normal(size=(3, 3)) * 0.3
    A2 = rng.normal(size=(3, 3)) * 0.3
    rep = DetRep(DetForm.D2, A1, A2, constant=2.0)
    f = det_poly(rep, DetForm.D2)
    pts = rng.uniform(-1, 1, (50, 4))
    for a, b, c, d in pts:
        x, y = complex(a, b), complex(c, d)
        assert f(x, y) == pytest.approx(det_value(rep, DetForm.D2, x, y), rel=1e-10, abs=1e-12)


def test_det_poly_sigmae_from_blocks():
    k = KBlocks(np.array([[0.5, 0.1], [0.2, -0.3]]), 1, 1)
    f = det_poly(k, DetForm.SIGMAE)
    # det(I - K diag(sigma, e)) = 1 - 0.5 sigma + 0.3 e + (-0.15 - 0.02) sigma e
    assert np.allclose(f.coeffs, [[1, 0.3], [-0.5, -0.17]], atol=1e-14)


def test_no_roots_grid_on_bidisk():
    f = Poly2(Coords.ZZETA, [[1, 0], [0, -0.25]])
    scan = no_roots_grid(f, Domain.CLOSED_BIDISK, 21)
    assert scan.min_modulus == pytest.approx(0.75, abs=1e-12)
    assert scan.samples == (1 + 21 * 3) ** 2

    g = Poly2(Coords.ZZETA, [[-0.5], [1]])
    assert no_roots_grid(g, Domain.CLOSED_BIDISK, 41).min_modulus < 0.1


def test_no_roots_grid_on_symmetrized_bidisk():
    # p - 2 has no zeros where |p| <= 1
    f = Poly2(Coords.SP, [[-2, 1]])
    scan = no_roots_grid(f, Domain.CLOSED_G, 21)
    assert scan.min_modulus == pytest.approx(1.0, abs=1e-12)
    z, zeta = scan.argmin_bidisk
    assert scan.argmin == pytest.approx((z + zeta, z * zeta))
    with pytest.raises(InputError):
        no_roots_grid(Z2_PLUS_ZETA2, Domain.CLOSED_G, 21)

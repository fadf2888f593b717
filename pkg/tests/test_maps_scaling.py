import numpy as np
import pytest

from cscaling.geometry import make_catalog_domain
from cscaling.maps import AffineMap, HoloMap, as_point, finite_difference_jacobian
from cscaling.scaling import (OrbitSpec, ball_automorphism, bp_model_automorphisms,
                              cayley_siegel_to_ball, centering_map, corner_dilatation,
                              default_orbit, frankel_scaling, pinchuk_dilatation,
                              pinchuk_scaling_sequence, siegel_dilation)


def _rand(rng, n, d=2, scale=1.0):
    return scale * (rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d)))


def test_as_point_validation():
    assert as_point([1, 2]).dtype == complex
    with pytest.raises(ValueError):
        as_point([1, 2], 3)
    with pytest.raises(ValueError):
        as_point([np.nan, 0])


def test_affine_roundtrip(rng):
    A = AffineMap(_rand(rng, 2), _rand(rng, 1)[0])
    B = AffineMap(_rand(rng, 2), _rand(rng, 1)[0])
    z = _rand(rng, 10)
    assert np.allclose(A.inverse()(A(z)), z, atol=1e-12)
    assert np.allclose((A @ B)(z), A(B(z)), atol=1e-12)


def test_affine_singular_inverse():
    with pytest.raises(ValueError):
        AffineMap(np.zeros((2, 2)), np.zeros(2)).inverse()


def test_ball_automorphism_properties(rng):
    a = np.array([0.9, 0])
    phi = ball_automorphism(a)
    assert np.allclose(phi(np.zeros(2)), a)
    z = _rand(rng, 50, scale=0.3)
    z = z[np.linalg.norm(z, axis=1) < 1]
    assert np.allclose(phi(phi(z)), z, atol=1e-10)
    assert np.all(np.linalg.norm(phi(z), axis=1) < 1)
    assert np.allclose(ball_automorphism([0, 0])(z), -z)
    with pytest.raises(ValueError):
        ball_automorphism([1, 0])


def test_holomap_jacobian_matches_finite_differences(rng):
    phi = ball_automorphism([0.3, 0.2j])
    for z in _rand(rng, 5, scale=0.2):
        J = phi.jacobian(z)
        Jfd = finite_difference_jacobian(phi, z)
        assert np.allclose(J, Jfd, rtol=1e-6, atol=1e-8)


def test_cayley_examples(rng):
    C = cayley_siegel_to_ball()
    assert np.allclose(C(np.array([1, 0], complex)), 0)
    assert np.linalg.norm(C(np.array([2, 1], complex))) < 1
    with pytest.raises(ValueError):
        C(np.array([-1, 0], complex))
    z = _rand(rng, 200)
    inside_siegel = z[:, 0].real > np.abs(z[:, 1]) ** 2
    inside_ball = np.linalg.norm(C(z), axis=1) < 1
    assert np.array_equal(inside_siegel, inside_ball)
    assert np.allclose(C.inverse(C(z)), z, atol=1e-12)


def test_corner_dilatation_examples(rng):
    assert np.allclose(corner_dilatation([1, 1]).matrix, np.eye(2))
    assert np.allclose(corner_dilatation([2 + 2j, 4])(np.array([2 + 2j, 4])), [1, 1])
    L = corner_dilatation([3, 5 + 1j])
    z = _rand(rng, 500)
    inside = np.all(z.real > 0, axis=1)
    assert np.array_equal(inside, np.all(L(z).real > 0, axis=1))
    with pytest.raises(ValueError):
        corner_dilatation([0, 1])


def test_bp_model_automorphisms(rng):
    for m, t, s in [(1, 1.0, 1.0), (2, 0.0, 16.0), (3, -2.0, 0.3)]:
        phi = bp_model_automorphisms(m, t, s)
        rho = make_catalog_domain("bp_model", (m,))
        z = _rand(rng, 400)
        assert np.array_equal(rho(z) < 0, rho(phi(z)) < 0)
    assert np.allclose(bp_model_automorphisms(2, 0, 16)(np.array([1, 0j]))[0], 2)
    assert np.allclose(bp_model_automorphisms(2, 0, 1.0).func(np.eye(2, dtype=complex)), np.eye(2))
    with pytest.raises(ValueError):
        bp_model_automorphisms(1, 0, 0)


def test_cayley_conjugates_bp_model_to_ball_automorphism(rng):
    # bp_model(1) in (z, w) is the Siegel domain with slots swapped
    C = cayley_siegel_to_ball()
    swap = np.array([[0, 1], [1, 0]])
    phi = bp_model_automorphisms(1, 0.7, 2.5)
    z = _rand(rng, 300, scale=0.5)
    z = z[np.linalg.norm(z, axis=1) < 1]
    w = C(phi(C.inverse(z) @ swap) @ swap)
    assert np.all(np.linalg.norm(w, axis=1) < 1)


def test_centering_examples():
    s = make_catalog_domain("siegel")
    p, A = centering_map(s, [0.3, 0])
    assert np.allclose(p, 0) and np.allclose(A.translation, 0)
    b = make_catalog_domain("ball")
    p, A = centering_map(b, [0.9, 0])
    assert np.allclose(p, [1, 0]) and np.allclose(A(p), 0)
    with pytest.raises(ValueError):
        centering_map(b, [1.5, 0])


@pytest.mark.parametrize("t", [0.5, 0.1, 1e-3])
def test_pinchuk_dilatation_normalizes(t):
    L = pinchuk_dilatation(make_catalog_domain("ball"), [1 - t, 0])
    assert np.allclose(L([1 - t, 0]), [1, 0], atol=1e-12)
    assert np.isclose(L.metadata["lambda0"], t)


def test_siegel_is_fixed_by_dilatation(rng):
    s = make_catalog_domain("siegel")
    z = _rand(rng, 1000)
    for nu in (1, 4, 9):
        L = pinchuk_dilatation(s, [1 / nu, 0])
        assert np.array_equal(s(z) < 0, s(L(z)) < 0)
        assert np.array_equal(s(z) < 0, s(L.inverse()(z)) < 0)


def test_scaling_sequence_normalizes_base():
    b = make_catalog_domain("ball")
    maps = pinchuk_scaling_sequence(b, default_orbit(b), 12)
    for m in maps:
        assert np.allclose(m(np.zeros(2, complex)), [1, 0], atol=1e-10)
    assert pinchuk_scaling_sequence(b, default_orbit(b), 0) == []


def test_orbit_spec_from_mapping():
    orb = OrbitSpec.from_mapping({"domain": "ball", "point": "1,0", "family": "ball_mobius"})
    assert orb.check(10) >= 1
    with pytest.raises(ValueError):
        OrbitSpec.from_mapping({"domain": "ball", "point": "1,0", "family": "nope"})


def test_frankel_normalization():
    q = np.zeros(2, complex)
    phi = ball_automorphism([0.5, 0.2])
    w = frankel_scaling(phi, q)
    assert np.allclose(w(q), 0)
    assert np.allclose(w.jacobian(q), np.eye(2), atol=1e-10)
    assert np.allclose(finite_difference_jacobian(w, q), np.eye(2), atol=1e-6)
    ident = AffineMap.identity(2).as_holomap()
    q = np.array([0.1, 0.2j])
    assert np.allclose(frankel_scaling(ident, q)(np.zeros(2)), -q)


def test_frankel_singular():
    sing = HoloMap(lambda z: z * 0, lambda z: np.zeros((2, 2)))
    with pytest.raises(ValueError):
        frankel_scaling(sing, np.zeros(2))


def test_siegel_dilation_is_automorphism(rng):
    s = make_catalog_domain("siegel")
    z = _rand(rng, 300)
    assert np.array_equal(s(z) < 0, s(siegel_dilation(0.37)(z)) < 0)

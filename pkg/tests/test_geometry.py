import numpy as np
import pytest

from cscaling.geometry import (CATALOG, EXCEEDS, RealPolynomial, convex_normal_form,
                               levi_classify, make_catalog_domain, order_of_contact)

from conftest import boundary_point, catalog


def test_ball_center_value_and_gradient():
    rho = make_catalog_domain("ball")
    assert rho([0, 0]) == -1
    assert np.allclose(rho.grad(np.zeros(2, complex)), 0)


def test_egg_boundary_and_siegel_interior():
    assert make_catalog_domain("egg", (2,))([1, 0]) == 0
    assert make_catalog_domain("siegel")([1, 0]) < 0


@pytest.mark.parametrize("tag,params", [("nope", ()), ("egg", (0,)), ("bp_model", (-1,))])
def test_catalog_errors(tag, params):
    with pytest.raises(ValueError):
        make_catalog_domain(tag, params)


def test_polynomial_derivatives_match_finite_differences(rng):
    rho = make_catalog_domain("kohn_nirenberg")
    z = 0.3 * (rng.normal(size=2) + 1j * rng.normal(size=2))
    h = 1e-6
    g = np.zeros(2, complex)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        dx = (rho(z + e) - rho(z - e)) / (2 * h)
        dy = (rho(z + 1j * e) - rho(z - 1j * e)) / (2 * h)
        g[j] = 0.5 * (dx - 1j * dy)
    assert np.allclose(rho.grad(z), g, atol=1e-7)


def test_polynomial_from_dict_roundtrip():
    p = RealPolynomial.from_dict(1, {((1,), (1,)): 1.0})
    assert np.isclose(p(np.array([0.5 + 0.5j])), 0.5)


def test_levi_examples():
    r = levi_classify(make_catalog_domain("ball"), [1, 0])
    assert r.classification == "strongly_pseudoconvex"
    assert np.allclose(r.levi_eigenvalues, [1.0])
    assert levi_classify(make_catalog_domain("halfspace"), [0, 5]).classification == "levi_flat"
    r = levi_classify(make_catalog_domain("egg", (2,)), [1, 0])
    assert np.allclose(r.levi_eigenvalues, [0.0])
    assert r.classification == "weakly_pseudoconvex"


def test_levi_errors():
    with pytest.raises(ValueError, match="boundary"):
        levi_classify(make_catalog_domain("ball"), [0.5, 0])


def test_levi_report_json_fields():
    d = levi_classify(make_catalog_domain("ball"), [1, 0]).to_dict()
    for key in ("point", "gradient", "levi_eigenvalues", "classification"):
        assert key in d


def test_levi_scale_invariance():
    rho = make_catalog_domain("egg", (2,))
    p = np.array([0.6, (1 - 0.36) ** 0.25])
    a, b = levi_classify(rho, p), levi_classify(rho.scaled(3.0), p)
    assert a.classification == b.classification
    assert np.allclose(3.0 * a.levi_matrix, b.levi_matrix)


def test_ball_normalized_levi(rng):
    rho = make_catalog_domain("ball")
    for _ in range(20):
        p = boundary_point(rho, rng)
        r = levi_classify(rho, p)
        assert r.classification == "strongly_pseudoconvex"
        assert np.isclose(r.levi_eigenvalues[0], 1.0)
        rn = levi_classify(rho, p, normalize=True)
        assert np.isclose(rn.levi_eigenvalues[0], 0.5) and rn.normalized


@pytest.mark.parametrize("tag", CATALOG)
def test_hessian_is_hermitian(tag, rng):
    rho = catalog(tag)
    for _ in range(5):
        H = rho.hess(boundary_point(rho, rng))
        assert np.abs(H - H.conj().T).max() <= 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_egg_finite_type(k):
    rep = order_of_contact(make_catalog_domain("egg", (k,)), [1, 0])
    assert rep.finite_type == 2 * k


def test_finite_type_ball_and_halfspace():
    assert order_of_contact(make_catalog_domain("ball"), [1, 0]).finite_type == 2
    assert order_of_contact(make_catalog_domain("halfspace"), [0, 0]).finite_type == EXCEEDS


def test_finite_type_errors():
    with pytest.raises(ValueError):
        order_of_contact(make_catalog_domain("ball", dim=3), [1, 0, 0])
    with pytest.raises(ValueError):
        order_of_contact(make_catalog_domain("ball"), [1, 0], max_p=17)


@pytest.mark.parametrize("tag,p", [("siegel", [0, 0]), ("ball", [1, 0]), ("egg", [0, 1])])
def test_convex_normal_form_residual(tag, p):
    nf = convex_normal_form(catalog(tag), p)
    assert nf.residual_ratio <= 0.25
    assert np.allclose(nf.forward(np.asarray(p, complex)), 0, atol=1e-12)
    z = np.asarray(p, complex) - 0.01 * np.array([1, 0.3j])
    assert np.allclose(nf.inverse(nf.forward(z)), z, atol=1e-12)


def test_convex_normal_form_rejects_flat():
    with pytest.raises(ValueError):
        convex_normal_form(make_catalog_domain("halfspace"), [0, 0])

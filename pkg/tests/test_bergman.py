import numpy as np
import pytest
from math import factorial
from scipy.special import beta

from cscaling.bergman import (bergman_kernel, bergman_metric, fit_limit, kernel_diagonal,
                              klembeck_harness, klembeck_target, monomial_norms,
                              reproducing_error, sectional_curvature)


@pytest.fixture(scope="module")
def ball():
    return monomial_norms("ball", 24, dim=2)


@pytest.fixture(scope="module")
def disc():
    return monomial_norms("disc", 48)


@pytest.fixture(scope="module")
def bidisc():
    return monomial_norms("bidisc", 24)


def test_norms_match_closed_forms(ball, disc):
    # ball in C^d: pi^d alpha! / (|alpha| + d)!
    exact = [np.pi ** 2 * factorial(a) * factorial(b) / factorial(a + b + 2) for a, b in ball.alphas]
    assert np.max(np.abs(ball.norms / exact - 1)) < 1e-11
    assert np.allclose(disc.norms, np.pi / (np.arange(49) + 1), rtol=1e-12, atol=0)


def test_egg_norms_match_beta_closed_form():
    k = 2
    egg = monomial_norms("egg", 12, (k,))
    a, b = egg.alphas[:, 0], egg.alphas[:, 1]
    exact = (2 * np.pi) ** 2 / (2 * (a + 1)) / (2 * k) * beta((b + 1) / k, a + 2)
    assert np.max(np.abs(egg.norms / exact - 1)) < 1e-11


def test_kernel_values(ball, disc, bidisc):
    assert abs(bergman_kernel(disc, [0], [0]) - 1 / np.pi) < 1e-10
    assert abs(bergman_kernel(ball, [0, 0], [0, 0]) - 2 / np.pi ** 2) < 1e-10
    assert abs(bergman_kernel(bidisc, [0, 0], [0, 0]) - 1 / np.pi ** 2) < 1e-10
    assert abs(bergman_kernel(disc, [0.5], [0.5]) - 1 / (np.pi * 0.75 ** 2)) < 1e-10


def test_hermitian_symmetry(ball):
    z, w = [0.2 + 0.1j, -0.3j], [0.1, 0.25 - 0.2j]
    assert bergman_kernel(ball, z, w) == np.conj(bergman_kernel(ball, w, z))


def test_kernel_bounded_below_by_inverse_volume(ball):
    pts = np.array([[0.3, 0.1j], [-0.2, 0.4], [0.0, 0.5]])
    assert np.all(kernel_diagonal(ball, pts) >= 1 / ball.volume)


def test_tail_check_raises_near_boundary(disc):
    with pytest.raises(ValueError, match="tail"):
        bergman_kernel(disc, [0.99], [0.99])


def test_norm_errors():
    with pytest.raises(ValueError):
        monomial_norms("siegel", 4)
    with pytest.raises(ValueError):
        monomial_norms("ball", 80)
    with pytest.raises(ValueError):
        monomial_norms("egg", 4)


def test_metric_examples(ball, disc, bidisc):
    assert np.isclose(bergman_metric(disc, [0]).matrix[0, 0], 2.0)
    assert np.allclose(bergman_metric(ball, [0, 0]).matrix, 3 * np.eye(2))
    assert np.allclose(bergman_metric(bidisc, [0, 0]).matrix, 2 * np.eye(2))
    z = np.array([0.3, 0.2j])
    n = 1 - np.vdot(z, z).real
    exact = 3 * (np.eye(2) / n + np.outer(z.conj(), z) / n ** 2)
    assert np.allclose(bergman_metric(ball, z).matrix, exact, atol=1e-9)


def test_curvature_examples(ball, disc, bidisc):
    assert abs(sectional_curvature(disc, [0.3], [1]).curvature + 2) < 1e-6
    assert abs(sectional_curvature(ball, [0.1, 0.2j], [1, 1j]).curvature + 4 / 3) < 1e-8
    assert abs(sectional_curvature(bidisc, [0.1, 0.1], [1, 0]).curvature + 2) < 1e-6
    assert abs(sectional_curvature(bidisc, [0, 0], [1, 1]).curvature + 1) < 1e-6


def test_curvature_scale_invariant_in_direction(ball):
    q = [0.2, -0.1j]
    s1 = sectional_curvature(ball, q, [0.3, 1 + 0.5j]).curvature
    s2 = sectional_curvature(ball, q, [0.3 * (2 - 1j), (1 + 0.5j) * (2 - 1j)]).curvature
    assert abs(s1 - s2) < 1e-10


def test_disc_radius_scaling():
    big = monomial_norms("disc", 48, radius=2.0)
    assert abs(bergman_kernel(big, [0], [0]) - 1 / (4 * np.pi)) < 1e-10
    assert abs(sectional_curvature(big, [0.6], [1]).curvature + 2) < 1e-6


def test_curvature_rejects_zero_direction(ball):
    with pytest.raises(ValueError):
        sectional_curvature(ball, [0, 0], [0, 0])


def test_reproducing_property():
    k = monomial_norms("ball", 8, dim=2)
    assert reproducing_error(k, [0.3, 0.2j]) < 1e-8


def test_fit_limit_recovers_polynomial():
    ts = np.array([0.4, 0.3, 0.2, 0.1])
    assert np.isclose(fit_limit(ts, -1 + 0.5 * ts ** 2 - ts ** 3), -1)


def test_klembeck_ball_and_errors():
    res = klembeck_harness("ball", [1, 0], trunc=32)
    assert res.verdict == "pass"
    assert abs(res.fitted_limit - klembeck_target(2)) < 1e-3
    with pytest.raises(ValueError):
        klembeck_harness("ball", [1, 0], t_list=[], trunc=8)


def test_kernel_csv(disc):
    lines = disc.to_csv().splitlines()
    assert lines[0] == "alpha,c_alpha" and len(lines) == 50

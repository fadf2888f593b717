import numpy as np
import pytest

from cscaling.harmonic import (PoissonGrid, boundary_integral, poisson_ball, poisson_bound_scan,
                               sphere_measure, sphere_points)


def test_sphere_measure():
    assert np.isclose(sphere_measure(1), 2 * np.pi)
    assert np.isclose(sphere_measure(2), 4 * np.pi)


def test_poisson_values():
    assert np.isclose(poisson_ball([0, 0], [1, 0]), 1 / (2 * np.pi))
    assert np.isclose(poisson_ball([0.5, 0], [1, 0]), 3 / (2 * np.pi))
    assert np.isclose(poisson_ball([0.5, 0], [-1, 0]), 1 / (6 * np.pi))


def test_poisson_errors():
    with pytest.raises(ValueError):
        poisson_ball([1, 0], [1, 0])
    with pytest.raises(ValueError):
        poisson_ball([0, 0], [0.5, 0])
    with pytest.raises(ValueError):
        poisson_ball([0, 0, 0], [1, 0])


@pytest.mark.parametrize("x", [[0, 0], [0.5, 0.3], [0.0, 0.999], [0.2, 0.1, 0.9], [0, 0, 0]])
def test_boundary_integral_is_one(x):
    assert abs(boundary_integral(x) - 1) < 1e-8


def test_sphere_points_unit():
    assert np.allclose(np.linalg.norm(sphere_points(2, 50), axis=1), 1)
    with pytest.raises(ValueError):
        sphere_points(3, 10)


def test_disc_scan_envelope():
    scan = poisson_bound_scan(1)
    assert scan.verdict == "pass"
    assert abs(scan.c1_hat - 1 / (2 * np.pi)) < 1e-12
    assert 1 / (2 * np.pi) <= scan.c2_hat <= 1 / np.pi + 1e-9
    assert scan.to_csv().splitlines()[0] == "x,y,P,ratio"


def test_ratio_identity():
    # P |x-y|^2 / delta = (1 + |x|) / (2 pi) on the disc
    g = PoissonGrid(1, n_radii=5, n_dirs=4, n_boundary=8)
    scan = poisson_bound_scan(1, g)
    r = np.linalg.norm(scan.rows[:, :2], axis=1)
    assert np.allclose(scan.rows[:, -1], (1 + r) / (2 * np.pi))


def test_three_ball_envelope():
    scan = poisson_bound_scan(2, PoissonGrid(2, n_radii=6, n_dirs=20, n_boundary=40))
    w = sphere_measure(2)
    assert 1 / w - 1e-12 <= scan.c1_hat <= scan.c2_hat <= 2 / w


def test_single_point_scan():
    scan = poisson_bound_scan(1, points=[[0.0, 0.0]])
    assert scan.c1_hat == scan.c2_hat

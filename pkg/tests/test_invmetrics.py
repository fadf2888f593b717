import numpy as np
import pytest

from cscaling.geometry import make_catalog_domain
from cscaling.invmetrics import (MetricValue, caratheodory_halfspace_lower, graham_asymptotics,
                                 kobayashi_closed_form, kobayashi_linear_disc_upper, lee_ratio,
                                 metric, nearest_boundary_point, richardson, sandwich)


def test_closed_form_examples():
    assert kobayashi_closed_form("ball", [0, 0], [1, 0]).value == 1
    r = 0.6
    assert np.isclose(kobayashi_closed_form("disc", [r], [1]).value, 1 / (1 - r * r))
    assert np.isclose(kobayashi_closed_form("ball", [r, 0], [0, 1]).value, 1 / np.sqrt(1 - r * r))
    assert np.isclose(kobayashi_closed_form("bidisc", [0.5, 0], [1, 1]).value, 4 / 3)
    assert np.isclose(kobayashi_closed_form("halfspace", [2, 0], [1, 0]).value, 0.25)


def test_closed_form_errors():
    with pytest.raises(ValueError):
        kobayashi_closed_form("kohn_nirenberg", [0, 0], [1, 0])
    with pytest.raises(ValueError):
        kobayashi_closed_form("ball", [1, 0], [1, 0])


def test_siegel_closed_form_matches_cayley_center():
    # (1, 0) maps to the centre of the ball with derivative diag(-1/2, 1)
    assert np.isclose(kobayashi_closed_form("siegel", [1, 0], [1, 0]).value, 0.5)
    assert np.isclose(kobayashi_closed_form("siegel", [1, 0], [0, 1]).value, 1.0)


def test_metric_value_ordering():
    with pytest.raises(ValueError):
        MetricValue(1.0, 2.0, 3.0, "sandwich")


def test_lower_bound_examples():
    b = make_catalog_domain("ball")
    assert caratheodory_halfspace_lower(b, [0, 0], [1, 0]).lower >= 0.5 - 1e-12
    bd = make_catalog_domain("bidisc")
    assert np.isclose(caratheodory_halfspace_lower(bd, [0, 0], [1, 0]).lower, 1.0)
    h = make_catalog_domain("halfspace")
    assert np.isclose(caratheodory_halfspace_lower(h, [2, 0], [1, 0]).lower,
                      kobayashi_closed_form("halfspace", [2, 0], [1, 0]).value)


def test_lower_bound_rejects_nonconvex():
    with pytest.raises(ValueError):
        caratheodory_halfspace_lower(make_catalog_domain("kohn_nirenberg"), [0, -1], [1, 0])


def test_sandwich_brackets_closed_form():
    b = make_catalog_domain("ball")
    q, xi = [0.3, 0.2], [0.4, 1j]
    exact = kobayashi_closed_form("ball", q, xi).value
    mv = sandwich(b, q, xi)
    assert mv.lower <= exact * (1 + 1e-12) and exact <= mv.upper * (1 + 1e-9)


def test_linear_disc_upper_ball_center():
    b = make_catalog_domain("ball")
    assert np.isclose(kobayashi_linear_disc_upper(b, [0, 0], [0, 1]).upper, 1.0, atol=1e-8)


def test_metric_dispatch():
    assert metric("ball", [0, 0], [1, 0]).method == "closed_form"
    assert metric(make_catalog_domain("egg", (2,)), [0, 0], [1, 0]).method == "sandwich"


def test_nearest_point():
    b = make_catalog_domain("ball")
    p, d = nearest_boundary_point(b, [0.5, 0])
    assert np.allclose(p, [1, 0]) and np.isclose(d, 0.5)
    with pytest.raises(ValueError, match="ambiguous"):
        nearest_boundary_point(b, [0, 0])


def test_richardson_exact_on_quadratics():
    ts = [0.4, 0.2, 0.1]
    assert np.isclose(richardson(ts, [3 + 2 * t - t * t for t in ts]), 3.0)


def test_graham_ball_normal_and_tangential():
    b = make_catalog_domain("ball")
    res = graham_asymptotics(b, [1, 0], [1, 0])
    assert abs(res.fitted["dF"] - 0.5) < 1e-3
    for r in res.rows:
        assert np.isclose(r.dF, 1 / (2 - r.t))   # d F = 1 / (1 + r)
    res = graham_asymptotics(b, [1, 0], [0, 1])
    assert abs(res.fitted["sqrt_dF"] - 1 / np.sqrt(2)) < 1e-3
    assert res.to_csv().splitlines()[0] == "t,d,F,dF,sqrt_dF,lee_ratio"


def test_graham_errors():
    with pytest.raises(ValueError):
        graham_asymptotics(make_catalog_domain("ball"), [1, 0], [1, 0], t_list=[])
    with pytest.raises(ValueError):
        graham_asymptotics(make_catalog_domain("egg", (2,)), [1, 0], [1, 0])


def test_graham_egg_sandwich_normal():
    egg = make_catalog_domain("egg", (2,))
    res = graham_asymptotics(egg, [0, 1], [0, 1], t_list=[2.0 ** -k for k in range(4, 8)])
    assert abs(res.fitted["dF"] - 0.5) < 1e-2
    assert all(r.width >= 0 for r in res.rows)


@pytest.mark.parametrize("xi,exact", [([1, 0], lambda r: (1 + r) ** 2 / 4),
                                      ([0, 1], lambda r: (1 + r) / 2)])
def test_lee_closed_form_rows(xi, exact):
    b = make_catalog_domain("ball")
    rs = [0.9, 0.99, 0.999]
    res = lee_ratio(b, [1, 0], xi, [[r, 0] for r in rs])
    for r, row in zip(rs, res.rows):
        assert abs(row.lee_ratio - exact(r)) < 1e-10


def test_lee_errors():
    b = make_catalog_domain("ball")
    with pytest.raises(ValueError):
        lee_ratio(b, [1, 0], [0, 0], [[0.5, 0]])

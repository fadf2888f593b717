"""Kobayashi and Caratheodory infinitesimal metrics.

Closed forms on the ball, polydisc, half-plane products and the Siegel
domain; certified sandwich bounds on convex catalog domains; harnesses for
the boundary asymptotics of the metric (normal/tangential limits and the
ratio with the normalized Levi form).
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize, minimize_scalar

from .geometry import DefiningFunction, levi_classify
from .maps import as_point
from .scaling import cayley_siegel_to_ball

CLOSED_FORM_TAGS = ("ball", "disc", "bidisc", "polydisc", "halfspace", "halfplane_product",
                    "siegel")
GOLDEN = (1 + 5 ** 0.5) / 2


@dataclass(frozen=True)
class MetricValue:
    value: float
    lower: float
    upper: float
    method: str

    def __post_init__(self):
        if not (self.lower <= self.value + 1e-15 * max(1.0, abs(self.value))
                and self.value <= self.upper + 1e-15 * max(1.0, abs(self.value))):
            raise ValueError("metric bounds are inconsistent")

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# closed forms

def _ball_metric(q, xi):
    s = 1.0 - np.sum(np.abs(q) ** 2, axis=-1)
    if np.any(s <= 0):
        raise ValueError("point is not inside the ball")
    ip = np.sum(xi * q.conj(), axis=-1)
    f2 = (np.sum(np.abs(xi) ** 2, axis=-1) * s + np.abs(ip) ** 2) / s ** 2
    return np.sqrt(f2)


def kobayashi_closed_form(tag: str, q, xi) -> MetricValue:
    """Kobayashi (= Caratheodory) metric on a model domain.

    ball: F^2 = (|xi|^2 (1 - |q|^2) + |<q, xi>|^2) / (1 - |q|^2)^2;
    polydisc: max_j |xi_j| / (1 - |q_j|^2); half-plane factors {Re z_j > 0}
    contribute |xi_j| / (2 Re q_j) (``halfspace`` is H x C^{d-1});
    siegel: pullback of the ball value through the Cayley transform.
    """
    q = as_point(q)
    xi = as_point(xi, q.size)
    if tag in ("ball", "disc"):
        val = float(_ball_metric(q, xi))
    elif tag in ("bidisc", "polydisc"):
        s = 1.0 - np.abs(q) ** 2
        if np.any(s <= 0):
            raise ValueError("point is not inside the polydisc")
        val = float(np.max(np.abs(xi) / s))
    elif tag == "halfspace":
        if q[0].real <= 0:
            raise ValueError("point is not inside the half-space")
        val = float(abs(xi[0]) / (2 * q[0].real))
    elif tag == "halfplane_product":
        if np.any(q.real <= 0):
            raise ValueError("point is not inside the half-plane product")
        val = float(np.max(np.abs(xi) / (2 * q.real)))
    elif tag == "siegel":
        if q[0].real <= np.sum(np.abs(q[1:]) ** 2):
            raise ValueError("point is not inside the Siegel domain")
        phi = cayley_siegel_to_ball(q.size)
        val = float(_ball_metric(phi(q), phi.jacobian(q) @ xi))
    else:
        raise ValueError(f"no closed-form metric for {tag!r}")
    return MetricValue(val, val, val, "closed_form")


# ---------------------------------------------------------------------------
# support functions of convex catalog domains

def _normal_index(rho):
    return 1 if rho.tag == "bp_model" else 0


def support_function(rho: DefiningFunction, n) -> float:
    """h(n) = sup over the domain of Re <z, n>, <z, n> = sum z_j conj(n_j)."""
    n = as_point(n, rho.dim)
    a = np.abs(n)
    tag = rho.tag
    if tag == "ball":
        return float(np.linalg.norm(n))
    if tag == "bidisc":
        return float(a.sum())
    if tag == "egg":
        k = rho.params[0]
        if a[1] == 0:
            return float(a[0])

        def neg(r):
            return -(a[0] * np.sqrt(max(1.0 - r ** (2 * k), 0.0)) + a[1] * r)

        rs = np.linspace(0, 1, 201)
        i = int(np.argmin([neg(r) for r in rs]))
        lo, hi = rs[max(i - 1, 0)], rs[min(i + 1, 200)]
        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        best = max(-res.fun, -neg(rs[i]))
        return float(best * (1 + 1e-12))
    if tag in ("halfspace", "siegel", "bp_model"):
        j = _normal_index(rho)
        nj = n[j]
        if abs(nj.imag) > 1e-14 * max(1.0, abs(nj)) or nj.real >= 0:
            return np.inf
        s = -nj.real
        rest = np.delete(a, j)
        if tag == "halfspace":
            return 0.0 if np.all(rest == 0) else np.inf
        if tag == "siegel":
            return float(np.sum(rest ** 2) / (4 * s))
        m = rho.params[0]
        c = rest[0]
        if m == 1:
            return float(c * c / (4 * s))
        r = (c / (2 * m * s)) ** (1.0 / (2 * m - 1))
        return float(c * r - s * r ** (2 * m))
    raise ValueError(f"no support function for {tag!r}")


def fan_directions(dim: int, count: int = 64) -> np.ndarray:
    """Deterministic golden-ratio (Kronecker) points on the unit sphere of C^dim."""
    from scipy.stats import norm

    alphas = np.array([np.modf(GOLDEN ** (1.0 / (j + 1)) * 1000)[0] for j in range(2 * dim)])
    k = np.arange(1, count + 1)[:, None]
    u = np.modf(0.5 + k * alphas)[0]
    x = norm.ppf(np.clip(u, 1e-9, 1 - 1e-9))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x[:, :dim] + 1j * x[:, dim:]


def _query_directions(dim, xi, count):
    axes = np.eye(dim, dtype=complex)
    return np.vstack([xi / np.linalg.norm(xi), axes, -axes, fan_directions(dim, count)])


def _require_interior(rho, q):
    q = as_point(q, rho.dim)
    if not rho(q) < 0:
        raise ValueError("query point is not interior")
    return q


def caratheodory_halfspace_lower(rho: DefiningFunction, q, xi, fan: int = 64) -> MetricValue:
    """Lower bound for the Caratheodory (hence Kobayashi) metric of a convex domain.

    Each fan direction n projects the domain by z -> <z, n> into a planar
    convex set. Circled domains project into the disc of radius h(n); the
    others into the half-plane {Re w <= h(n)} after rotating n so that its
    normal component is negative real. The disc or half-plane metric of the
    projected point is a lower bound by the decreasing property of the
    Caratheodory metric; the maximum over the fan is returned.
    """
    if not rho.convex:
        raise ValueError("half-space support bounds need a convex domain")
    q = _require_interior(rho, q)
    xi = as_point(xi, rho.dim)
    if np.linalg.norm(xi) == 0:
        raise ValueError("direction must be nonzero")
    best = 0.0
    j = _normal_index(rho)
    for n in _query_directions(rho.dim, xi, fan):
        if rho.circled:
            R = support_function(rho, n)
            w = np.vdot(n, q)
            val = R * abs(np.vdot(n, xi)) / (R * R - abs(w) ** 2)
        else:
            if abs(n[j]) < 1e-12:
                continue
            n = n * (-abs(n[j]) / n[j])
            h = support_function(rho, n)
            if not np.isfinite(h):
                continue
            gap = h - np.vdot(n, q).real
            if gap <= 0:
                raise ValueError("degenerate support search")
            val = abs(np.vdot(n, xi)) / (2 * gap)
        best = max(best, float(val))
    return MetricValue(best, best, np.inf, "caratheodory_lower")


def _ray_root(rho, q, v, r_max=1e6):
    """First r > 0 with rho(q + r v) = 0; inf if none before r_max."""

    def f(r):
        return float(rho(q + r * v))

    lo, hi = 0.0, 1e-3
    while f(hi) < 0:
        lo, hi = hi, 2 * hi
        if hi > r_max:
            return np.inf
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def ray_roots(rho, q, V, r_max: float = 1e6, iters: int = 64) -> np.ndarray:
    """Vectorized first boundary crossing along the rays q + r v (rows of V); inf if none."""
    V = np.atleast_2d(V)
    lo = np.zeros(len(V))
    hi = np.full(len(V), 1e-3)
    open_ = rho(q + hi[:, None] * V) < 0
    while open_.any():
        lo[open_] = hi[open_]
        hi[open_] *= 2
        open_ &= hi <= r_max
        if not open_.any():
            break
        open_[open_] = rho(q + hi[open_, None] * V[open_]) < 0
    hit = hi <= r_max
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = rho(q + mid[:, None] * V) < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return np.where(hit, hi, np.inf)


def _slice_radius(rho, c, u, angles):
    th = 2 * np.pi * np.arange(angles) / angles
    return float(ray_roots(rho, c, np.exp(1j * th)[:, None] * u).min())


def kobayashi_linear_disc_upper(rho: DefiningFunction, q, xi, angles: int = 128,
                                optimize_center: bool = True) -> MetricValue:
    """Upper bound from linear discs zeta -> c + R zeta u (u = xi/|xi|) inside the domain.

    A disc of radius R centred at c = q - x u passes through q at zeta = x/R
    and gives F(q, xi) <= |xi| R / (R^2 - |x|^2). The centre offset x is
    optimized over the slice of the domain by the complex line q + C u.
    """
    q = _require_interior(rho, q)
    xi = as_point(xi, rho.dim)
    nrm = np.linalg.norm(xi)
    if nrm == 0:
        raise ValueError("direction must be nonzero")
    u = xi / nrm
    k = int(np.argmax(np.abs(u)))
    u = u * (abs(u[k]) / u[k])

    def gain(x):
        # (R^2 - |x|^2) / R, to be maximized
        off = complex(x[0], x[1])
        c = q - off * u
        if not rho(c) < 0:
            return 0.0
        R = _slice_radius(rho, c, u, angles)
        if not np.isfinite(R):
            return np.inf
        return max((R * R - abs(off) ** 2) / R, 0.0)

    best_x = np.zeros(2)
    best = gain(best_x)
    if optimize_center and np.isfinite(best):
        res = minimize(lambda x: -gain(x), best_x, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14 * max(best, 1e-300),
                                "maxiter": 400, "initial_simplex": best * 0.5 * np.array(
                                    [[0, 0], [1, 0], [0, 1]])})
        if -res.fun > best:
            best, best_x = -res.fun, res.x
    if not np.isfinite(best):
        return MetricValue(0.0, 0.0, 0.0, "kobayashi_upper")
    # certify the radius at the chosen centre with a refined angular minimum
    off = complex(best_x[0], best_x[1])
    c = q - off * u

    def radius(theta):
        return float(ray_roots(rho, c, (np.exp(1j * theta) * u)[None, :])[0])

    th = 2 * np.pi * np.arange(angles) / angles
    rs = ray_roots(rho, c, np.exp(1j * th)[:, None] * u)
    i = int(np.argmin(rs))
    h = 2 * np.pi / angles
    ref = minimize_scalar(radius, bounds=(th[i] - h, th[i] + h), method="bounded",
                          options={"xatol": 1e-12})
    R = min(float(rs[i]), float(ref.fun))
    gain_c = (R * R - abs(off) ** 2) / R
    up = nrm / gain_c
    return MetricValue(up, 0.0, up, "kobayashi_upper")


def sandwich(rho: DefiningFunction, q, xi, fan: int = 64, angles: int = 128) -> MetricValue:
    lo = caratheodory_halfspace_lower(rho, q, xi, fan).value
    up = kobayashi_linear_disc_upper(rho, q, xi, angles).value
    up = max(up, lo)
    return MetricValue(0.5 * (lo + up), lo, up, "sandwich")


def metric(rho_or_tag, q, xi, method: str = "auto") -> MetricValue:
    """Closed form when the domain has one, else the convex sandwich."""
    tag = rho_or_tag if isinstance(rho_or_tag, str) else rho_or_tag.tag
    if method in ("auto", "closed_form") and tag in CLOSED_FORM_TAGS:
        return kobayashi_closed_form(tag, q, xi)
    if method == "closed_form" or isinstance(rho_or_tag, str):
        raise ValueError(f"no closed-form metric for {tag!r}")
    return sandwich(rho_or_tag, q, xi)


# ---------------------------------------------------------------------------
# nearest boundary point

def nearest_boundary_point(rho: DefiningFunction, q, uniq_tol: float = 1e-8,
                           starts: int = 4, seed: int = 0, max_iter: int = 200):
    """Nearest boundary point to an interior q and the distance.

    Fixed-point iteration b = first boundary crossing on the ray q + r n(b),
    n the outward normal; at the limit q - b is normal to the boundary.
    Several perturbed starts must agree to ``uniq_tol``.
    """
    q = _require_interior(rho, q)
    g = rho.grad(q)
    rng = np.random.default_rng(seed)
    found = []
    for s in range(starts):
        if np.linalg.norm(g) > 1e-12:
            n = g.conj() / np.linalg.norm(g)
            if s:
                n = n + 0.05 * (rng.standard_normal(rho.dim) + 1j * rng.standard_normal(rho.dim))
        else:
            n = rng.standard_normal(rho.dim) + 1j * rng.standard_normal(rho.dim)
        n = n / np.linalg.norm(n)
        for _ in range(max_iter):
            r = _ray_root(rho, q, n)
            if not np.isfinite(r):
                raise ValueError("ray from q does not meet the boundary")
            b = q + r * n
            n_new = rho.outward_normal(b)
            if np.linalg.norm(n_new - n) < 1e-14:
                break
            n = n_new
        found.append(b)
    found = np.array(found)
    if np.max(np.linalg.norm(found - found[0], axis=1)) > uniq_tol:
        raise ValueError("ambiguous nearest boundary point")
    b = found[0]
    return b, float(np.linalg.norm(q - b))


# ---------------------------------------------------------------------------
# boundary asymptotics

@dataclass
class AsymptoticsRow:
    t: float
    d: float
    xi_normal: float
    levi: float
    F: float
    dF: float
    sqrt_dF: float
    lee_ratio: float
    width: float = 0.0


@dataclass
class AsymptoticsResult:
    rows: list
    kind: str
    fitted: dict
    expected: dict
    grid: list
    tol: float = 2e-2
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return {"kind": self.kind, "fitted": self.fitted, "expected": self.expected,
                "grid": self.grid, "rows": [asdict(r) for r in self.rows],
                "metadata": self.metadata}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "d", "F", "dF", "sqrt_dF", "lee_ratio"])
        for r in self.rows:
            w.writerow([repr(r.t), repr(r.d), repr(r.F), repr(r.dF), repr(r.sqrt_dF),
                        repr(r.lee_ratio)])
        return buf.getvalue()


def decompose(rho: DefiningFunction, p, xi):
    """xi = xi_N + xi_T at the boundary point p; returns (xi_N, xi_T, unit normal)."""
    nu = rho.outward_normal(p)
    xi_n = np.vdot(nu, xi) * nu
    return xi_n, xi - xi_n, nu


def normalized_levi(rho: DefiningFunction, p, v) -> float:
    """sum H_jk v_j conj(v_k) / |grad rho(p)|."""
    H = rho.hess(p)
    return float((v @ H @ v.conj()).real / rho.real_gradient_norm(p))


def _row(rho, tag, q, xi, t):
    b, d = nearest_boundary_point(rho, q)
    xi_n, xi_t, _ = decompose(rho, b, xi)
    mv = metric(tag if tag in CLOSED_FORM_TAGS else rho, q, xi)
    F = mv.value
    nN = float(np.linalg.norm(xi_n))
    L = normalized_levi(rho, b, xi_t)
    ratio = ((nN / (2 * d)) ** 2 + L / d) / F ** 2
    return AsymptoticsRow(t, d, nN, L, F, d * F, np.sqrt(d) * F, ratio, mv.upper - mv.lower)


def richardson(ts, values, order: int = 2) -> float:
    """Value at t = 0 of the polynomial of degree ``order`` through the last order+1 rows."""
    ts = np.asarray(ts, dtype=float)[-(order + 1):]
    vs = np.asarray(values, dtype=float)[-(order + 1):]
    if len(ts) < order + 1:
        return float(vs[-1])
    return float(np.polyval(np.polyfit(ts, vs, len(ts) - 1), 0.0))


def default_t_list(kmax: int = 10):
    return [2.0 ** -k for k in range(1, kmax + 1)]


def graham_asymptotics(rho: DefiningFunction, p, xi, t_list=None, tag=None) -> AsymptoticsResult:
    """Rows along the inner normal q_t = p - t nu(p) with Richardson-fitted limits of
    d F (normal part) and sqrt(d) F (tangential part)."""
    t_list = default_t_list() if t_list is None else list(t_list)
    if not t_list:
        raise ValueError("t_list is empty")
    rep = levi_classify(rho, p)
    if rep.classification != "strongly_pseudoconvex":
        raise ValueError(f"boundary point is {rep.classification}")
    p = rep.point
    xi = as_point(xi, rho.dim)
    tag = tag or rho.tag
    xi_n, xi_t, nu = decompose(rho, p, xi)
    rows = []
    for t in sorted(t_list, reverse=True):
        q = p - t * nu
        if not rho(q) < 0:
            raise ValueError(f"t = {t} leaves the domain")
        rows.append(_row(rho, tag, q, xi, t))
    ts = [r.t for r in rows]
    nN, nT = np.linalg.norm(xi_n), np.linalg.norm(xi_t)
    kind = "normal" if nT <= 1e-12 * np.linalg.norm(xi) else (
        "tangential" if nN <= 1e-12 * np.linalg.norm(xi) else "mixed")
    fitted = {"dF": richardson(ts, [r.dF for r in rows]),
              "sqrt_dF": richardson(ts, [r.sqrt_dF for r in rows])}
    expected = {"dF": 0.5 * float(nN)}
    return AsymptoticsResult(rows, kind, fitted, expected, ts,
                             metadata={"richardson_order": 2})


def lee_ratio(rho: DefiningFunction, p, xi, q_list, tag=None, tol: float = 2e-2):
    """Rows of the Levi-weighted ratio ((|xi_N|/2d)^2 + L(xi_T)/d) / F^2 for each q."""
    xi = as_point(xi, rho.dim)
    if np.linalg.norm(xi) == 0:
        raise ValueError("direction must be nonzero")
    rep = levi_classify(rho, p)
    if rep.classification != "strongly_pseudoconvex":
        raise ValueError(f"boundary point is {rep.classification}")
    tag = tag or rho.tag
    rows = []
    for q in q_list:
        q = _require_interior(rho, q)
        rows.append(_row(rho, tag, q, xi, float("nan")))
    for r in rows:
        r.t = r.d
    last = rows[-1].lee_ratio if rows else float("nan")
    return AsymptoticsResult(rows, "lee", {"lee_ratio": last}, {"lee_ratio": 1.0},
                             [r.d for r in rows], tol=tol,
                             metadata={"verdict": "pass" if abs(last - 1) <= tol else "fail"})

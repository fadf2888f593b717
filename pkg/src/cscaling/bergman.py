"""Bergman kernel, metric and holomorphic sectional curvature on complete
Reinhardt domains, from the orthogonal monomial basis."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .geometry import make_catalog_domain
from .maps import as_point

BERGMAN_TAGS = ("disc", "ball", "bidisc", "egg")
ACCEPT_SENSITIVITY = 1e-4


@dataclass(frozen=True)
class HermitianForm:
    matrix: np.ndarray
    positive_definite: bool

    def __call__(self, v, w=None):
        v = as_point(v)
        w = v if w is None else as_point(w)
        return complex(v @ self.matrix @ w.conj())

    def to_dict(self):
        M = np.asarray(self.matrix)
        return {"matrix": np.stack([M.real, M.imag], -1).tolist(),
                "positive_definite": self.positive_definite}


# ---------------------------------------------------------------------------
# monomial norms

def _radial_shadow(tag, dim, params, radius):
    """Upper limits for the nested radial integration, innermost variable first.

    ``bounds[i](outer)`` gives the range of r_i given r_{i+1}, ..., r_{d-1}.
    """
    if tag == "disc":
        return [lambda outer: np.full(outer.shape[:-1], radius)]
    if tag == "bidisc":
        return [lambda outer: np.ones(outer.shape[:-1])] * dim
    if tag == "ball":
        def bound(outer):
            return np.sqrt(np.clip(1.0 - np.sum(outer ** 2, axis=-1), 0.0, None))
        return [bound] * dim
    if tag == "egg":
        k = params[0]
        return [lambda outer: np.sqrt(np.clip(1.0 - outer[..., 0] ** (2 * k), 0.0, None)),
                lambda outer: np.ones(outer.shape[:-1])]
    raise ValueError(f"monomial norms need a complete Reinhardt tag, got {tag!r}")


def radial_nodes(tag, dim, params=(), n: int = 32, radius: float = 1.0):
    """Nested Gauss-Legendre nodes (P x d radii) and weights including the
    Jacobian prod r_j and the angular factor (2 pi)^d."""
    bounds = _radial_shadow(tag, dim, params, radius)
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    pts = np.zeros((1, 0))
    wts = np.ones(1)
    for i in range(dim - 1, -1, -1):
        upper = bounds[i](pts)
        r = upper[:, None] * x[None, :]
        wts = (wts[:, None] * upper[:, None] * w[None, :]).reshape(-1)
        pts = np.concatenate([r.reshape(-1, 1), np.repeat(pts, n, axis=0)], axis=1)
    wts = wts * np.prod(pts, axis=1) * (2 * np.pi) ** dim
    return pts, wts


def multi_indices(dim: int, trunc: int) -> np.ndarray:
    grids = np.meshgrid(*([np.arange(trunc + 1)] * dim), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def _norms_at(tag, dim, params, radius, n, trunc):
    pts, wts = radial_nodes(tag, dim, params, n, radius)
    # per-coordinate radial moments r^{2a}, a = 0..trunc
    e = 2 * np.arange(trunc + 1)
    if dim == 1:
        return (wts[:, None] * pts[:, 0:1] ** e).sum(0)
    mats = [pts[:, j:j + 1] ** e for j in range(dim)]
    if dim == 2:
        return np.einsum("p,pa,pb->ab", wts, mats[0], mats[1])
    return np.einsum("p,pa,pb,pc->abc", wts, mats[0], mats[1], mats[2])


@dataclass(frozen=True)
class MonomialKernel:
    """Truncated Bergman kernel sum_alpha z^alpha conj(w)^alpha / c_alpha."""

    dim: int
    tag: str
    params: tuple
    trunc: int
    alphas: np.ndarray
    norms: np.ndarray
    quadrature: dict = field(default_factory=dict)

    @property
    def volume(self) -> float:
        return float(self.norms[np.all(self.alphas == 0, axis=1)][0])

    def truncated(self, trunc: int) -> "MonomialKernel":
        keep = np.all(self.alphas <= trunc, axis=1)
        return MonomialKernel(self.dim, self.tag, self.params, trunc, self.alphas[keep],
                              self.norms[keep], self.quadrature)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "c_alpha"])
        for a, c in zip(self.alphas, self.norms):
            w.writerow([" ".join(map(str, a)), repr(float(c))])
        return buf.getvalue()


def monomial_norms(tag: str, trunc: int, params=(), dim: int = None, radius: float = 1.0,
                   rtol: float = 1e-12, n_start: int = 16, n_max: int = 2048) -> MonomialKernel:
    """Squared L^2 norms of all monomials z^alpha with max(alpha) <= trunc.

    The angular integrals are done analytically; the radial integral runs
    over nested Gauss-Legendre nodes, doubling the node count until every
    norm changes by less than ``rtol`` relatively.
    """
    if trunc > 64 or trunc < 0:
        raise ValueError("truncation must lie in 0..64")
    params = tuple(params)
    if tag == "disc":
        dim = 1
    elif tag in ("bidisc", "egg"):
        dim = 2
    elif tag == "ball":
        dim = dim or (int(params[0]) if params else 2)
        if dim > 3:
            raise ValueError("ball quadrature supports dimension <= 3")
    else:
        raise ValueError(f"monomial norms need a complete Reinhardt tag, got {tag!r}")
    if tag == "egg" and not params:
        raise ValueError("egg needs the exponent k")
    n = n_start
    prev = _norms_at(tag, dim, params, radius, n, trunc)
    while True:
        n *= 2
        if n > n_max:
            raise ValueError("quadrature did not converge")
        cur = _norms_at(tag, dim, params, radius, n, trunc)
        if np.max(np.abs(cur - prev) / np.abs(cur)) < rtol:
            break
        prev = cur
    alphas = multi_indices(dim, trunc)
    norms = cur[tuple(alphas.T)]
    if np.any(norms <= 0):
        raise ValueError("non-positive monomial norm")
    return MonomialKernel(dim, tag, params, trunc, alphas, norms,
                          {"nodes_per_axis": n, "rtol": rtol, "radius": radius})


# ---------------------------------------------------------------------------
# kernel and derivatives

def _factors(z, alphas):
    """Per-coordinate z^a, a z^{a-1}, a (a-1) z^{a-2} for every multi-index."""
    F0 = np.empty(alphas.shape, dtype=complex)
    F1 = np.empty(alphas.shape, dtype=complex)
    F2 = np.empty(alphas.shape, dtype=complex)
    for j in range(alphas.shape[1]):
        a = alphas[:, j]
        zj = z[j]
        F0[:, j] = zj ** a
        F1[:, j] = np.where(a >= 1, a * zj ** np.maximum(a - 1, 0), 0)
        F2[:, j] = np.where(a >= 2, a * (a - 1) * zj ** np.maximum(a - 2, 0), 0)
    return F0, F1, F2


def _monomial_derivatives(z, alphas):
    """m, D1[:, j] = d m / dz_j, D2[:, j, l] = d^2 m / dz_j dz_l."""
    F0, F1, F2 = _factors(z, alphas)
    d = alphas.shape[1]
    M = len(alphas)
    m = np.prod(F0, axis=1)
    D1 = np.empty((M, d), dtype=complex)
    D2 = np.empty((M, d, d), dtype=complex)
    for j in range(d):
        others = np.prod(np.delete(F0, j, axis=1), axis=1)
        D1[:, j] = F1[:, j] * others
        D2[:, j, j] = F2[:, j] * others
        for l in range(j + 1, d):
            rest = np.prod(np.delete(F0, [j, l], axis=1), axis=1)
            D2[:, j, l] = D2[:, l, j] = F1[:, j] * F1[:, l] * rest
    return m, D1, D2


def _monomials(z, alphas):
    z = np.asarray(z, dtype=complex)
    out = np.ones(z.shape[:-1] + (len(alphas),), dtype=complex)
    for j in range(alphas.shape[1]):
        out = out * z[..., j:j + 1] ** alphas[:, j]
    return out


def tail_estimate(kern: MonomialKernel, terms: np.ndarray) -> float:
    """Geometric estimate of the neglected tail from the last two shells."""
    shell = kern.alphas.max(axis=1)
    a = np.abs(terms[shell == kern.trunc]).sum()
    b = np.abs(terms[shell == kern.trunc - 1]).sum()
    if a == 0:
        return 0.0
    if b == 0:
        return np.inf
    x = a / b
    return np.inf if x >= 1 else float(a * x / (1 - x))


def bergman_kernel(kern: MonomialKernel, z, w, tol: float = 1e-8, check_tail: bool = True) -> complex:
    """K(z, w) = sum z^alpha conj(w)^alpha / c_alpha."""
    z = as_point(z, kern.dim)
    w = as_point(w, kern.dim)
    terms = _monomials(z, kern.alphas) * _monomials(w, kern.alphas).conj() / kern.norms
    K = complex(terms.sum())
    if check_tail and kern.trunc >= 2:
        tail = tail_estimate(kern, terms)
        if tail > tol * abs(K):
            raise ValueError(f"truncation tail {tail:.2e} exceeds tolerance; point too close "
                             "to the boundary for this truncation")
    return K


def kernel_diagonal(kern: MonomialKernel, z) -> np.ndarray:
    """K(z, z) for an array of points, without tail checks."""
    m = _monomials(z, kern.alphas)
    return (np.abs(m) ** 2 / kern.norms).sum(-1)


def _log_derivatives(kern, q, xi):
    m, D1, D2 = _monomial_derivatives(q, kern.alphas)
    wgt = 1.0 / kern.norms
    K = float((wgt * np.abs(m) ** 2).sum())
    a1 = D1 @ xi
    a2 = np.einsum("ajl,j,l->a", D2, xi, xi)
    mu = (wgt[:, None] * D1 * m.conj()[:, None]).sum(0) / K
    mu11 = np.einsum("a,aj,ak->jk", wgt, D1, D1.conj()) / K
    G = mu11 - np.outer(mu, mu.conj())
    G = 0.5 * (G + G.conj().T)
    M1 = mu @ xi
    M2 = (wgt * a2 * m.conj()).sum() / K
    V11 = (wgt[:, None] * a1[:, None] * D1.conj()).sum(0) / K
    V21 = (wgt[:, None] * a2[:, None] * D1.conj()).sum(0) / K
    M11 = V11 @ xi.conj()
    M21 = V21 @ xi.conj()
    M22 = (wgt * np.abs(a2) ** 2).sum() / K
    kappa4 = (M22 - 2 * M21 * M1.conjugate() - 2 * M21.conjugate() * M1
              - M2 * M2.conjugate() - 2 * M11 ** 2
              + 2 * (M2 * M1.conjugate() ** 2 + 4 * M11 * M1 * M1.conjugate()
                     + M2.conjugate() * M1 ** 2)
              - 6 * abs(M1) ** 4)
    A = V21 - M2 * mu.conj() - 2 * M1 * V11 + 2 * M1 ** 2 * mu.conj()
    return K, G, kappa4.real, A


def bergman_metric(kern: MonomialKernel, q, tol: float = 1e-8) -> HermitianForm:
    """g_{jk} = d^2 log K(z, z) / dz_j d conj z_k at q, from term-wise series derivatives."""
    q = as_point(q, kern.dim)
    bergman_kernel(kern, q, q, tol)
    _, G, _, _ = _log_derivatives(kern, q, np.eye(kern.dim, dtype=complex)[0])
    pd = bool(np.all(np.linalg.eigvalsh(G) > 0))
    if not pd:
        raise ValueError("Bergman metric is not positive definite; truncation too small")
    return HermitianForm(G, pd)


def _curvature(kern, q, xi):
    K, G, kappa4, A = _log_derivatives(kern, q, xi)
    g = float((xi @ G @ xi.conj()).real)
    term2 = float((A.conj() @ np.linalg.solve(G.T, A)).real)
    return g, 2.0 * (-kappa4 + term2) / g ** 2


@dataclass
class CurvatureReport:
    q: np.ndarray
    xi: np.ndarray
    metric: float
    curvature: float
    trunc: int
    sensitivity: float
    accepted: bool

    def to_dict(self):
        return {"q": np.stack([self.q.real, self.q.imag], -1).tolist(),
                "xi": np.stack([self.xi.real, self.xi.imag], -1).tolist(),
                "metric": self.metric, "curvature": self.curvature, "trunc": self.trunc,
                "sensitivity": self.sensitivity, "accepted": self.accepted}


def sectional_curvature(kern: MonomialKernel, q, xi, tol: float = ACCEPT_SENSITIVITY,
                        strict: bool = True) -> CurvatureReport:
    """Holomorphic sectional curvature of the Bergman metric.

    S = 2 R(xi, conj xi, xi, conj xi) / g(xi, xi)^2 with
    R_{j k l m} = -d_l d_mbar g_{jk} + g^{pq} d_l g_{jq} d_mbar g_{pk}; the
    factor 2 pins the unit disc at -2. Sensitivity is |S_N - S_{N-4}|.
    """
    q = as_point(q, kern.dim)
    xi = as_point(xi, kern.dim)
    if np.linalg.norm(xi) == 0:
        raise ValueError("direction must be nonzero")
    g, S = _curvature(kern, q, xi)
    if g <= 0:
        raise ValueError("Bergman metric is not positive at q")
    sens = 0.0
    if kern.trunc >= 5:
        _, S4 = _curvature(kern.truncated(kern.trunc - 4), q, xi)
        sens = abs(S - S4)
    ok = sens < tol
    if strict and not ok:
        raise ValueError(f"truncation sensitivity {sens:.2e} above tolerance {tol:.1e}")
    return CurvatureReport(q, xi, g, S, kern.trunc, sens, ok)


def klembeck_target(dim: int) -> float:
    """-4/(n+2) for C^{n+1}, i.e. -4/(dim+1)."""
    return -4.0 / (dim + 1)


@dataclass
class KlembeckResult:
    rows: list
    dropped: list
    fitted_limit: float
    target: float
    tol: float

    @property
    def verdict(self):
        if not np.isfinite(self.fitted_limit):
            return "fail"
        return "pass" if abs(self.fitted_limit - self.target) <= self.tol else "fail"

    def to_dict(self):
        return {"rows": [r.to_dict() | {"t": t} for t, r in self.rows],
                "dropped": [{"t": t, "reason": why} for t, why in self.dropped],
                "fitted_limit": self.fitted_limit, "target": self.target, "tol": self.tol,
                "verdict": self.verdict}


DEFAULT_T_LIST = (0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05)


def fit_limit(ts, values) -> float:
    """Value at t = 0 of the least-squares fit L + a t^2 (+ b t^3)."""
    ts = np.asarray(ts, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(ts) == 0:
        return float("nan")
    if len(ts) == 1:
        return float(v[0])
    powers = [0, 2] if len(ts) == 2 else [0, 2, 3]
    V = ts[:, None] ** np.asarray(powers)[None, :]
    return float(np.linalg.lstsq(V, v, rcond=None)[0][0])


def klembeck_harness(tag: str, p, t_list=DEFAULT_T_LIST, xi=None, trunc: int = 48, params=(), dim: int = None,
                     tol: float = 5e-2, kern: MonomialKernel = None) -> KlembeckResult:
    """Tabulate S(q_t, xi) along the inner normal at p and extrapolate to t = 0.

    Rows whose truncation sensitivity exceeds the acceptance rule are dropped
    (near the boundary the monomial series needs N of order 1/t). The limit is
    read off a least-squares fit S(t) ~ L + a t^2 + b t^3 over accepted rows.
    """
    t_list = list(t_list)
    if not t_list:
        raise ValueError("t_list is empty")
    kern = kern or monomial_norms(tag, trunc, params, dim)
    rho = make_catalog_domain("ball", dim=1) if tag == "disc" else \
        make_catalog_domain(tag, kern.params, dim=kern.dim)
    p = as_point(p, kern.dim)
    nu = rho.outward_normal(p)
    if xi is None:
        xi = nu
    xi = as_point(xi, kern.dim)
    rows, dropped = [], []
    for t in sorted(t_list, reverse=True):
        q = p - t * nu
        try:
            bergman_kernel(kern, q, q, tol=1e-6)
            rep = sectional_curvature(kern, q, xi, strict=False)
        except ValueError as exc:
            dropped.append((t, str(exc)))
            continue
        if not rep.accepted:
            dropped.append((t, f"sensitivity {rep.sensitivity:.2e}"))
            continue
        rows.append((t, rep))
    limit = fit_limit([t for t, _ in rows], [r.curvature for _, r in rows])
    return KlembeckResult(rows, dropped, float(limit), klembeck_target(kern.dim), tol)


def gram_matrix(kern: MonomialKernel, n_radial: int = None, n_angles: int = None) -> np.ndarray:
    """G[b, a] = int conj(z^b) z^a dmu by full quadrature: radial Gauss-Legendre
    nodes times a trapezoid rule in every angle (no orthogonality assumed)."""
    n_radial = n_radial or 2 * kern.quadrature.get("nodes_per_axis", 64)
    n_angles = n_angles or 2 * kern.trunc + 3
    d = kern.dim
    pts, wts = radial_nodes(kern.tag, d, kern.params, n_radial, kern.quadrature.get("radius", 1.0))
    wts = wts / (2 * np.pi) ** d
    A = kern.alphas
    S = A[:, None, :] + A[None, :, :]
    # angular trapezoid sums of exp(i k theta), k = a_j - b_j
    th = np.arange(n_angles) * (2 * np.pi / n_angles)
    K = A[None, :, :] - A[:, None, :]
    ang = np.prod(np.exp(1j * K[..., None] * th).sum(-1) * (2 * np.pi / n_angles), axis=-1)
    logr = np.log(np.maximum(pts, 1e-300))
    rad = np.zeros(S.shape[:2])
    for p in range(len(pts)):
        rad += wts[p] * np.exp(S @ logr[p])
    return rad * ang


def reproducing_error(kern: MonomialKernel, z, gram: np.ndarray = None) -> float:
    """max over alpha of |int K(z, zeta) zeta^alpha dmu(zeta) - z^alpha|."""
    z = as_point(z, kern.dim)
    G = gram_matrix(kern) if gram is None else gram
    mz = _monomials(z, kern.alphas)
    reproduced = (mz / kern.norms) @ G
    return float(np.max(np.abs(reproduced - mz)))

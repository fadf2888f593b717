"""Defining functions, the model-domain catalog, Levi form and finite type.

Every catalog entry is a real polynomial in (z, conj z), except the bidisc,
so gradients, complex Hessians and jets along curves are exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .maps import as_point

BOUNDARY_TOL = 1e-10
EIGEN_TOL = 1e-8

CATALOG = ("ball", "bidisc", "egg", "siegel", "halfspace", "kohn_nirenberg", "bp_model")


# ---------------------------------------------------------------------------
# real polynomials in (z, conj z)

def _monomial(z, zc, alpha, beta):
    out = np.ones(z.shape[:-1], dtype=complex)
    for j, (a, b) in enumerate(zip(alpha, beta)):
        if a:
            out = out * z[..., j] ** a
        if b:
            out = out * zc[..., j] ** b
    return out


@dataclass(frozen=True)
class RealPolynomial:
    """sum_k c_k z^alpha_k conj(z)^beta_k with Hermitian-symmetric coefficients."""

    dim: int
    terms: tuple  # ((alpha, beta, coeff), ...)

    @classmethod
    def from_dict(cls, dim, coeffs):
        terms = tuple((tuple(a), tuple(b), complex(c)) for (a, b), c in coeffs.items() if c != 0)
        return cls(dim, terms)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        zc = z.conj()
        total = np.zeros(z.shape[:-1], dtype=complex)
        for alpha, beta, c in self.terms:
            total = total + c * _monomial(z, zc, alpha, beta)
        return total.real

    def grad(self, z):
        """(d rho / d z_j)_j."""
        z = np.asarray(z, dtype=complex)
        zc = z.conj()
        out = np.zeros(z.shape, dtype=complex)
        for alpha, beta, c in self.terms:
            for j in range(self.dim):
                if alpha[j]:
                    a = list(alpha)
                    a[j] -= 1
                    out[..., j] += c * alpha[j] * _monomial(z, zc, a, beta)
        return out

    def hess(self, z):
        """(d^2 rho / d z_j d conj z_k)_{jk}."""
        z = np.asarray(z, dtype=complex)
        zc = z.conj()
        d = self.dim
        out = np.zeros(z.shape + (d,), dtype=complex)
        for alpha, beta, c in self.terms:
            for j in range(d):
                if not alpha[j]:
                    continue
                for k in range(d):
                    if not beta[k]:
                        continue
                    a = list(alpha)
                    b = list(beta)
                    a[j] -= 1
                    b[k] -= 1
                    out[..., j, k] += c * alpha[j] * beta[k] * _monomial(z, zc, a, b)
        return out

    def holo_hess(self, z):
        """(d^2 rho / d z_j d z_k)_{jk}."""
        z = np.asarray(z, dtype=complex)
        zc = z.conj()
        d = self.dim
        out = np.zeros(z.shape + (d,), dtype=complex)
        for alpha, beta, c in self.terms:
            for j in range(d):
                for k in range(d):
                    a = list(alpha)
                    if not a[j]:
                        continue
                    f = a[j]
                    a[j] -= 1
                    if not a[k]:
                        continue
                    f *= a[k]
                    a[k] -= 1
                    out[..., j, k] += c * f * _monomial(z, zc, a, beta)
        return out

    def jet_along(self, base, coeffs, exponents):
        """Coefficients of rho(base + (c_j t^e_j)_j) as a polynomial in (t, conj t).

        Returns ``(coef, mag)``: ``coef[i, k]`` multiplies ``t^i conj(t)^k``
        and ``mag`` holds the sums of absolute contributions, used to tell a
        genuine zero from cancellation noise.
        """
        base = as_point(base, self.dim)
        deg = 0
        for alpha, beta, _ in self.terms:
            deg = max(deg, sum(a * e for a, e in zip(alpha, exponents)),
                      sum(b * e for b, e in zip(beta, exponents)))
        coef = np.zeros((deg + 1, deg + 1), dtype=complex)
        mag = np.zeros((deg + 1, deg + 1))
        for alpha, beta, c in self.terms:
            pt = np.array([c])
            ps = np.array([1.0 + 0j])
            for j in range(self.dim):
                pt = np.convolve(pt, _binomial_series(base[j], coeffs[j], exponents[j], alpha[j]))
                ps = np.convolve(ps, _binomial_series(np.conj(base[j]), np.conj(coeffs[j]),
                                                      exponents[j], beta[j]))
            block = np.outer(pt, ps)
            coef[:block.shape[0], :block.shape[1]] += block
            mag[:block.shape[0], :block.shape[1]] += np.abs(block)
        return coef, mag


def _binomial_series(p, c, e, power):
    """Coefficients in t of (p + c t^e)^power."""
    out = np.zeros(e * power + 1, dtype=complex)
    for i in range(power + 1):
        out[e * i] += comb(power, i) * p ** (power - i) * c ** i
    return out


def _unit(dim, j):
    e = [0] * dim
    e[j] = 1
    return tuple(e)


def _abs_sq(dim, j, power=1):
    e = tuple(power if i == j else 0 for i in range(dim))
    return (e, e)


# ---------------------------------------------------------------------------
# defining functions

@dataclass(frozen=True)
class DefiningFunction:
    """A real defining function rho with Omega = {rho < 0} and exact derivatives."""

    dim: int
    tag: str
    value: Callable
    grad: Callable
    hess: Callable
    holo_hess: Optional[Callable] = None
    params: tuple = ()
    poly: Optional[RealPolynomial] = None
    convex: bool = False
    bounded: bool = True
    circled: bool = False
    metadata: dict = field(default_factory=dict, compare=False)

    def __call__(self, z):
        return self.value(np.asarray(z, dtype=complex))

    def contains(self, z):
        return self(z) < 0

    def real_gradient_norm(self, z):
        """Euclidean norm of the real gradient, equal to 2 |d rho / dz|."""
        return 2.0 * np.linalg.norm(self.grad(np.asarray(z, dtype=complex)), axis=-1)

    def outward_normal(self, z):
        """Unit outward normal at z as a complex vector (conj of the complex gradient)."""
        g = self.grad(as_point(z, self.dim))
        n = np.linalg.norm(g)
        if n == 0:
            raise ValueError("vanishing gradient")
        return g.conj() / n

    def scaled(self, c: float) -> "DefiningFunction":
        """The defining function c * rho for c > 0 (same domain)."""
        if c <= 0:
            raise ValueError("scale must be positive")
        hh = self.holo_hess

        return DefiningFunction(
            self.dim, self.tag,
            value=lambda z: c * self.value(z),
            grad=lambda z: c * self.grad(z),
            hess=lambda z: c * self.hess(z),
            holo_hess=None if hh is None else (lambda z: c * hh(z)),
            params=self.params,
            poly=None if self.poly is None else RealPolynomial(
                self.dim, tuple((a, b, c * k) for a, b, k in self.poly.terms)),
            convex=self.convex, bounded=self.bounded, circled=self.circled,
            metadata={**self.metadata, "scale": c * self.metadata.get("scale", 1.0)},
        )


def _from_poly(tag, poly, params=(), **flags):
    return DefiningFunction(poly.dim, tag, value=poly, grad=poly.grad, hess=poly.hess,
                            holo_hess=poly.holo_hess, params=tuple(params), poly=poly, **flags)


def _bidisc():
    def value(z):
        z = np.asarray(z, dtype=complex)
        return np.max(np.abs(z) ** 2, axis=-1) - 1.0

    def active(z):
        return np.argmax(np.abs(z) ** 2, axis=-1)

    def grad(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        j = active(z)
        np.put_along_axis(out, j[..., None], np.take_along_axis(z.conj(), j[..., None], -1), -1)
        return out

    def hess(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (2,), dtype=complex)
        j = active(z)
        out[..., 0, 0] = (j == 0)
        out[..., 1, 1] = (j == 1)
        return out

    def holo_hess(z):
        z = np.asarray(z, dtype=complex)
        return np.zeros(z.shape + (2,), dtype=complex)

    return DefiningFunction(2, "bidisc", value, grad, hess, holo_hess, convex=True,
                            circled=True, metadata={"smooth": False})


def make_catalog_domain(name: str, params=(), dim: int = 2) -> DefiningFunction:
    """Build a catalog defining function.

    ``ball``, ``siegel`` and ``halfspace`` take their dimension from ``dim``
    (``params[0]`` overrides it). ``egg`` needs ``k`` and ``bp_model`` needs
    ``m`` as ``params[0]``. ``kohn_nirenberg`` and ``bp_model`` use the
    coordinate order (z, w).
    """
    params = tuple(params)
    if name in ("ball", "siegel", "halfspace") and params:
        dim = int(params[0])
    if name == "ball":
        if dim < 1:
            raise ValueError("dimension must be positive")
        coeffs = {_abs_sq(dim, j): 1.0 for j in range(dim)}
        coeffs[((0,) * dim, (0,) * dim)] = -1.0
        return _from_poly("ball", RealPolynomial.from_dict(dim, coeffs), (dim,),
                          convex=True, circled=True)
    if name == "bidisc":
        return _bidisc()
    if name == "egg":
        if not params:
            raise ValueError("egg needs the exponent k")
        k = _positive_int(params[0], "k")
        coeffs = {_abs_sq(2, 0): 1.0, _abs_sq(2, 1, k): 1.0, ((0, 0), (0, 0)): -1.0}
        return _from_poly("egg", RealPolynomial.from_dict(2, coeffs), (k,),
                          convex=True, circled=True)
    if name == "siegel":
        if dim < 2:
            raise ValueError("siegel needs dimension >= 2")
        z0 = _unit(dim, 0)
        zero = (0,) * dim
        coeffs = {(z0, zero): -0.5, (zero, z0): -0.5}
        coeffs.update({_abs_sq(dim, j): 1.0 for j in range(1, dim)})
        return _from_poly("siegel", RealPolynomial.from_dict(dim, coeffs), (dim,),
                          convex=True, bounded=False)
    if name == "halfspace":
        z0 = _unit(dim, 0)
        zero = (0,) * dim
        coeffs = {(z0, zero): -0.5, (zero, z0): -0.5}
        return _from_poly("halfspace", RealPolynomial.from_dict(dim, coeffs), (dim,),
                          convex=True, bounded=False)
    if name == "kohn_nirenberg":
        # Re w + |z w|^2 + |z|^8 + (15/7) |z|^2 Re z^6, coordinates (z, w)
        coeffs = {
            ((0, 1), (0, 0)): 0.5, ((0, 0), (0, 1)): 0.5,
            ((1, 1), (1, 1)): 1.0,
            ((4, 0), (4, 0)): 1.0,
            ((7, 0), (1, 0)): 15 / 14, ((1, 0), (7, 0)): 15 / 14,
        }
        return _from_poly("kohn_nirenberg", RealPolynomial.from_dict(2, coeffs), (),
                          bounded=False)
    if name == "bp_model":
        if not params:
            raise ValueError("bp_model needs the exponent m")
        m = _positive_int(params[0], "m")
        # -Re w + |z|^{2m}, coordinates (z, w)
        coeffs = {((0, 1), (0, 0)): -0.5, ((0, 0), (0, 1)): -0.5, _abs_sq(2, 0, m): 1.0}
        return _from_poly("bp_model", RealPolynomial.from_dict(2, coeffs), (m,),
                          convex=True, bounded=False)
    raise ValueError(f"unknown catalog domain {name!r}; expected one of {CATALOG}")


def _positive_int(x, name):
    if int(x) != x or int(x) < 1:
        raise ValueError(f"{name} must be a positive integer, got {x!r}")
    return int(x)


def require_boundary(rho: DefiningFunction, p, tol: float = BOUNDARY_TOL) -> np.ndarray:
    p = as_point(p, rho.dim)
    if abs(float(rho(p))) > tol:
        raise ValueError(f"point is not on the boundary (rho = {float(rho(p)):.3e})")
    return p


# ---------------------------------------------------------------------------
# Levi form

def _cpair(x):
    x = np.asarray(x, dtype=complex)
    return np.stack([x.real, x.imag], axis=-1).tolist()


@dataclass(frozen=True)
class LeviReport:
    point: np.ndarray
    gradient: np.ndarray
    tangent_basis: np.ndarray
    levi_matrix: np.ndarray
    levi_eigenvalues: np.ndarray
    classification: str
    normalized: bool
    tol: float

    @property
    def min_eigenvalue(self) -> float:
        return float(self.levi_eigenvalues.min())

    @property
    def max_eigenvalue(self) -> float:
        return float(self.levi_eigenvalues.max())

    def to_dict(self) -> dict:
        return {
            "point": _cpair(self.point),
            "gradient": _cpair(self.gradient),
            "levi_eigenvalues": self.levi_eigenvalues.tolist(),
            "classification": self.classification,
            "normalized": self.normalized,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
            "tol": self.tol,
        }


def complex_tangent_basis(g) -> np.ndarray:
    """Orthonormal basis (columns) of {w : sum_j g_j w_j = 0}."""
    g = as_point(g)
    return scipy.linalg.null_space(g[None, :])


def restricted_levi(H, basis) -> np.ndarray:
    """L_ab = sum_jk H_jk b_a[j] conj(b_b[k]) for columns b_a of ``basis``."""
    L = basis.T @ H @ basis.conj()
    return 0.5 * (L + L.conj().T)


def _neighbour_levi(rho, p, basis, normalize, eps=1e-2, iters=30):
    """Tangential Levi eigenvalues at boundary points near p (tangent offsets
    pushed back to the boundary along the normal)."""
    out = []
    for u in np.concatenate([basis.T, 1j * basis.T]):
        for sgn in (1.0, -1.0):
            q = p + sgn * eps * u
            for _ in range(iters):
                g = rho.grad(q)
                n = np.linalg.norm(g)
                if n <= 1e-14:
                    break
                q = q - rho(q) / (2 * n) * g.conj() / n
            g = rho.grad(q)
            if abs(rho(q)) > 1e-8 or np.linalg.norm(g) <= 1e-14:
                continue
            L = restricted_levi(rho.hess(q), complex_tangent_basis(g))
            if normalize:
                L = L / (2.0 * np.linalg.norm(g))
            out.append(np.linalg.eigvalsh(L))
    return out


def levi_classify(rho: DefiningFunction, p, tol: float = EIGEN_TOL,
                  boundary_tol: float = BOUNDARY_TOL, normalize: bool = False) -> LeviReport:
    """Classify the boundary point p by the Levi form on the complex tangent space.

    With ``normalize`` the Levi matrix is divided by the real gradient norm
    ``|grad rho(p)|``.
    """
    if rho.dim < 2:
        raise ValueError("the Levi form needs dimension >= 2")
    p = require_boundary(rho, p, boundary_tol)
    g = rho.grad(p)
    if np.linalg.norm(g) <= 1e-14:
        raise ValueError("vanishing gradient: degenerate defining function")
    basis = complex_tangent_basis(g)
    L = restricted_levi(rho.hess(p), basis)
    if normalize:
        L = L / (2.0 * np.linalg.norm(g))
    eig = np.linalg.eigvalsh(L)
    if np.all(np.abs(eig) <= tol):
        # a degenerate point is only Levi-flat if the form stays zero nearby
        flat = all(np.all(np.abs(e) <= tol) for e in _neighbour_levi(rho, p, basis, normalize))
        cls = "levi_flat" if flat else "weakly_pseudoconvex"
    elif eig.min() > tol:
        cls = "strongly_pseudoconvex"
    elif eig.min() >= -tol:
        cls = "weakly_pseudoconvex"
    else:
        cls = "not_pseudoconvex"
    return LeviReport(p, g, basis, L, eig, cls, normalize, tol)


# ---------------------------------------------------------------------------
# convex normal form at a strongly pseudoconvex point

@dataclass(frozen=True)
class NormalForm:
    """Holomorphic polynomial chart Psi with Psi(p) = 0 and the new defining function.

    ``rho_tilde(zeta) = expm1(A rho(Psi^{-1} zeta) / c) / A`` has second-order
    Taylor part ``-Re zeta_0 + |zeta|^2`` at the origin.
    """

    point: np.ndarray
    rho: DefiningFunction
    frame: np.ndarray          # columns: outward normal, tangent basis
    shear: np.ndarray          # y, tangential shear by the normal coordinate
    chol: np.ndarray           # lower Cholesky factor of the tangential form
    quad: np.ndarray           # symmetric matrix of the absorbed holomorphic quadratic
    scale: float               # c
    convexifier: float         # A
    radius: float
    residual_ratio: float

    @property
    def dim(self):
        return self.rho.dim

    def forward(self, z):
        z = np.asarray(z, dtype=complex)
        w = z - self.point
        x = w @ self.frame.conj()
        v = x[..., 0]
        u = x[..., 1:] + v[..., None] * self.shear
        zeta_t = u @ self.chol.conj()
        s = np.einsum("...j,jk,...k->...", w, self.quad, w)
        zeta0 = -v - s
        return np.concatenate([zeta0[..., None], zeta_t], axis=-1)

    def inverse(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        u_t = zeta[..., 1:] @ np.linalg.inv(self.chol.conj().T).T
        nhat = self.frame[:, 0]
        B = self.frame[:, 1:]
        a = nhat - B @ self.shear
        b0 = u_t @ B.T
        Sa = self.quad @ a
        alpha = a @ Sa
        beta = b0 @ Sa
        gamma = np.einsum("...j,jk,...k->...", b0, self.quad, b0)
        bq = 2 * beta + 1
        cq = gamma + zeta[..., 0]
        disc = np.sqrt(bq * bq - 4 * alpha * cq + 0j)
        disc = np.where((bq.conj() * disc).real < 0, -disc, disc)
        v = -2 * cq / (bq + disc)
        w = v[..., None] * a + b0
        return w + self.point

    def rho_tilde(self, zeta):
        r = self.rho(self.inverse(zeta)) / self.scale
        A = self.convexifier
        return r if A == 0 else np.expm1(A * r) / A

    def model(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return -zeta[..., 0].real + np.sum(np.abs(zeta) ** 2, axis=-1)


def _ball_samples(dim, radius, n, rng):
    x = rng.standard_normal((n, 2 * dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    r = radius * rng.uniform(0.02, 1.0, n) ** (1.0 / (2 * dim))
    x *= r[:, None]
    return x[:, :dim] + 1j * x[:, dim:]


def convex_normal_form(rho: DefiningFunction, p, r_start: float = 0.5, r_min: float = 1e-6,
                       samples: int = 400, seed: int = 0) -> NormalForm:
    """Holomorphic coordinates at a strongly pseudoconvex p in which rho becomes
    -Re z_0 + |z|^2 + R with |R| <= |z|^2 / 4 on B(0, 2r).

    The normal coordinate is corrected by a holomorphic quadratic that absorbs
    the pure (z, z) terms, the tangential coordinates are sheared to remove
    mixed normal/tangential Hermitian terms, and rho is replaced by
    expm1(A rho / c) / A to fix the |z_0|^2 coefficient.
    """
    rep = levi_classify(rho, p)
    if rep.classification != "strongly_pseudoconvex":
        raise ValueError(f"point is {rep.classification}, not strongly pseudoconvex")
    if rho.holo_hess is None:
        raise ValueError("defining function lacks the holomorphic Hessian")
    p = rep.point
    g = rep.gradient
    gn = float(np.linalg.norm(g))
    c = 2.0 * gn
    nhat = g.conj() / gn
    E = np.column_stack([nhat, rep.tangent_basis])
    H = rho.hess(p)
    Q = rho.holo_hess(p)
    Kx = E.T @ H @ E.conj() / c
    P = Kx.T
    PTT = 0.5 * (P[1:, 1:] + P[1:, 1:].conj().T)
    pT0 = P[1:, 0]
    y = np.linalg.solve(PTT, pT0)
    e_h = float((P[0, 0] - pT0.conj() @ y).real)
    A = 4.0 * (1.0 - e_h)
    chol = np.linalg.cholesky(PTT)
    quad = Q / c + A * np.outer(g, g) / c ** 2
    quad = 0.5 * (quad + quad.T)

    rng = np.random.default_rng(seed)
    r = r_start
    while r >= r_min:
        nf = NormalForm(p, rho, E, y, chol, quad, c, A, r, np.nan)
        zeta = _ball_samples(rho.dim, 2 * r, samples, rng)
        z = nf.inverse(zeta)
        roundtrip = np.max(np.abs(nf.forward(z) - zeta))
        if np.all(np.isfinite(z)) and roundtrip <= 1e-9 * max(1.0, 2 * r):
            resid = np.abs(nf.rho_tilde(zeta) - nf.model(zeta))
            ratio = float(np.max(resid / np.sum(np.abs(zeta) ** 2, axis=-1)))
            if ratio <= 0.25:
                return NormalForm(p, rho, E, y, chol, quad, c, A, r, ratio)
        r /= 2
    raise ValueError("normal-form radius search failed above the minimum radius")


# ---------------------------------------------------------------------------
# order of contact (finite type in C^2)

EXCEEDS = "exceeds search bound"


@dataclass(frozen=True)
class ContactReport:
    point: np.ndarray
    max_p: int
    max_q: int
    phases: int
    best_curve: Optional[dict]
    vanishing_order: Optional[int]
    finite_type: object  # int, Fraction or EXCEEDS

    def to_dict(self) -> dict:
        ft = self.finite_type
        if isinstance(ft, Fraction):
            ft = ft.numerator if ft.denominator == 1 else float(ft)
        return {
            "point": _cpair(self.point),
            "search": {"max_p": self.max_p, "max_q": self.max_q, "phases": self.phases,
                       "family": "monomial curves p + (a t^P, b t^Q), |a|,|b| in {0,1}"},
            "best_curve": self.best_curve,
            "vanishing_order": self.vanishing_order,
            "finite_type": ft,
        }


def vanishing_order(rho: DefiningFunction, p, coeffs, exponents, rtol: float = 1e-9):
    """Order of vanishing at t = 0 of t -> rho(p + (c_j t^e_j)); None if identically 0."""
    if rho.poly is None:
        raise ValueError("order of contact needs a polynomial defining function")
    coef, mag = rho.poly.jet_along(p, coeffs, exponents)
    nonzero = np.abs(coef) > rtol * np.maximum(mag, 1e-300)
    nonzero &= mag > 0
    if not nonzero.any():
        return None
    i, k = np.nonzero(nonzero)
    return int((i + k).min())


def order_of_contact(rho: DefiningFunction, p, max_p: int = 8, max_q: int = 8,
                     phases: int = 8) -> ContactReport:
    """Finite type at p: the largest normalized order of contact of a monomial curve.

    For the curve t -> p + (a t^P, b t^Q) the normalized order is the
    vanishing order of rho along it divided by min{P, Q} over the nonzero
    components.
    """
    if rho.dim != 2:
        raise ValueError("order of contact is implemented for dimension 2")
    if not (1 <= max_p <= 16 and 1 <= max_q <= 16):
        raise ValueError("search bounds must lie in 1..16")
    p = require_boundary(rho, p)
    choices = [0.0] + [np.exp(2j * np.pi * k / phases) for k in range(phases)]
    best = None
    for a, b in itertools.product(choices, choices):
        if a == 0 and b == 0:
            continue
        prange = range(1, max_p + 1) if a != 0 else (1,)
        qrange = range(1, max_q + 1) if b != 0 else (1,)
        for P, Q in itertools.product(prange, qrange):
            k = vanishing_order(rho, p, (a, b), (P, Q))
            mult = min(e for e, c in ((P, a), (Q, b)) if c != 0)
            curve = {"a": _cpair(a), "b": _cpair(b), "P": P if a != 0 else 0,
                     "Q": Q if b != 0 else 0}
            if k is None:
                return ContactReport(p, max_p, max_q, phases, curve, None, EXCEEDS)
            ratio = Fraction(k, mult)
            if best is None or ratio > best[0]:
                best = (ratio, k, curve)
    ratio, k, curve = best
    ft = ratio.numerator if ratio.denominator == 1 else ratio
    return ContactReport(p, max_p, max_q, phases, curve, k, ft)

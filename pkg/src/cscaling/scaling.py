"""Pinchuk centering and dilatation, Frankel scaling, and the catalog maps they use."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from .geometry import DefiningFunction, make_catalog_domain
from .maps import AffineMap, HoloMap, as_holomap, as_point

__all__ = [
    "AffineMap", "HoloMap", "OrbitSpec", "ball_automorphism", "bp_model_automorphisms",
    "cayley_siegel_to_ball", "centering_map", "corner_dilatation", "frankel_scaling",
    "pinchuk_dilatation", "pinchuk_scaling_sequence", "siegel_dilation",
]


# ---------------------------------------------------------------------------
# catalog maps

def ball_automorphism(a) -> HoloMap:
    """The involutive Moebius map of the unit ball exchanging 0 and a.

    phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>), s_a = sqrt(1 - |a|^2).
    For a = 0 this is z -> -z.
    """
    a = as_point(a)
    na2 = float(np.vdot(a, a).real)
    if na2 >= 1.0:
        raise ValueError("automorphism parameter must satisfy |a| < 1")
    d = a.size
    s = np.sqrt(1.0 - na2)
    P = np.outer(a, a.conj()) / na2 if na2 > 0 else np.zeros((d, d), dtype=complex)
    T = P + s * (np.eye(d) - P)

    def f(z):
        den = 1.0 - z @ a.conj()
        return (a - z @ T.T) / den[..., None]

    def jac(z):
        den = 1.0 - z @ a.conj()
        num = a - z @ T.T
        return (-T / den[..., None, None]
                + num[..., :, None] * a.conj()[None, :] / (den ** 2)[..., None, None])

    return HoloMap(f, jac, inverse=f, tag="ball_automorphism",
                   metadata={"a": a.tolist(), "convention": "phi_0(z) = -z"})


def cayley_siegel_to_ball(dim: int = 2) -> HoloMap:
    """(w, z') -> ((1 - w)/(1 + w), 2 z'/(1 + w)) from {Re w > |z'|^2} onto the ball."""

    def f(x):
        w = x[..., 0]
        den = 1.0 + w
        if np.any(np.abs(den) < 1e-14):
            raise ValueError("Cayley transform has a pole at w = -1")
        out = np.empty_like(x)
        out[..., 0] = (1.0 - w) / den
        out[..., 1:] = 2.0 * x[..., 1:] / den[..., None]
        return out

    def jac(x):
        w = x[..., 0]
        den = 1.0 + w
        J = np.zeros(x.shape + (dim,), dtype=complex)
        J[..., 0, 0] = -2.0 / den ** 2
        J[..., 1:, 0] = -2.0 * x[..., 1:] / (den ** 2)[..., None]
        for j in range(1, dim):
            J[..., j, j] = 2.0 / den
        return J

    def inv(y):
        u = y[..., 0]
        den = 1.0 + u
        if np.any(np.abs(den) < 1e-14):
            raise ValueError("inverse Cayley transform has a pole at u = -1")
        out = np.empty_like(y)
        out[..., 0] = (1.0 - u) / den
        out[..., 1:] = y[..., 1:] / den[..., None]
        return out

    return HoloMap(f, jac, inverse=inv, tag="cayley")


def bp_model_automorphisms(m: int, t: float, s: float) -> HoloMap:
    """(z, w) -> (s^{1/(2m)} z, s w + i t), preserving {Re w > |z|^{2m}}."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if s <= 0:
        raise ValueError("dilation factor s must be positive")
    c = s ** (1.0 / (2 * m))
    M = np.diag([c, s]).astype(complex)
    b = np.array([0.0, 1j * t])
    return AffineMap(M, b, {"m": m, "t": t, "s": s}).as_holomap()


def siegel_dilation(s: float, dim: int = 2) -> AffineMap:
    """(z_0, z') -> (s z_0, sqrt(s) z'), an automorphism of the Siegel domain."""
    if s <= 0:
        raise ValueError("dilation factor must be positive")
    return AffineMap(np.diag([s] + [np.sqrt(s)] * (dim - 1)).astype(complex), np.zeros(dim))


def corner_dilatation(t) -> AffineMap:
    """Diagonal map z_j -> (z_j - i Im t_j) / Re t_j of the corner V^2 = {Re z_0, Re z_1 >= 0}."""
    t = as_point(t)
    if np.any(t.real <= 0):
        raise ValueError("corner dilatation needs Re t_j > 0")
    M = np.diag(1.0 / t.real).astype(complex)
    b = -1j * t.imag / t.real
    return AffineMap(M, b, {"convention": "z -> (z - i Im t) / Re t", "t": t.tolist()})


# ---------------------------------------------------------------------------
# Pinchuk centering / dilatation

def _normal_direction(rho: DefiningFunction, q, direction):
    if direction is not None:
        u = complex(direction)
        if abs(u) == 0:
            raise ValueError("direction must be nonzero")
        return u / abs(u)
    g0 = rho.grad(q)[0]
    if abs(g0) < 1e-14:
        raise ValueError("cannot orient the z_0 normal line at q; pass a direction")
    return np.conj(g0) / abs(g0)


def centering_map(rho: DefiningFunction, q, direction=None, chart_radius: float = 2.0):
    """Boundary point p with p_j = q_j (j >= 1) and the centering map A with A(p) = 0.

    p is the first boundary crossing on the ray q + s u e_0 (s > 0), where u
    is the outward z_0 direction (from the gradient at q unless given).
    A(z)_0 = -(d rho(p) . (z - p)) / |d rho/dz_0 (p)| and A(z)_j = z_j - p_j.
    """
    q = as_point(q, rho.dim)
    if not rho(q) < 0:
        raise ValueError("centering needs an interior point (rho(q) < 0)")
    u = _normal_direction(rho, q, direction)
    e0 = np.zeros(rho.dim, dtype=complex)
    e0[0] = u

    def f(s):
        return float(rho(q + s * e0))

    grid = chart_radius * 2.0 ** -np.arange(60, -1, -1.0)
    prev = 0.0
    for s in grid:
        if f(s) >= 0:
            root = brentq(f, prev, s, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
            break
        prev = s
    else:
        raise ValueError("normal-line root not bracketed within the chart radius")
    p = q.copy()
    p[0] = q[0] + root * u
    g = rho.grad(p)
    g0 = abs(g[0])
    if g0 < 1e-14:
        raise ValueError("boundary point has no z_0 gradient component")
    M = np.eye(rho.dim, dtype=complex)
    M[0, :] = -g / g0
    A = AffineMap(M, -M @ p, {"alpha": (-g / g0).tolist(), "p": p.tolist()})
    return p, A


def pinchuk_dilatation(rho: DefiningFunction, q, anisotropy: Union[str, Callable] = "levi",
                       direction=None, chart_radius: float = 2.0) -> AffineMap:
    """Lambda = L o A with Lambda(q) = (1, 0, ..., 0).

    L divides the normal coordinate by lambda_0 = A(q)_0. Tangential
    coordinate j is divided by sqrt(|lambda_0|) under ``"sqrt"`` and by
    sqrt(|lambda_0| / mu_j) under ``"levi"``, mu_j being the diagonal Levi
    entry of rho / (2 |d rho/dz_0|) in centered coordinates; both agree on
    the Siegel domain. A callable receives (lambda_0, mu) and returns the
    tangential factors.
    """
    p, A = centering_map(rho, q, direction, chart_radius)
    q = as_point(q, rho.dim)
    lam0 = complex(A(q)[0])
    if lam0.real <= 0:
        raise ValueError("lambda_0 must have positive real part")
    g0 = abs(rho.grad(p)[0])
    J = np.linalg.inv(A.matrix)
    Hz = J.T @ (rho.hess(p) / (2 * g0)) @ J.conj()
    mu = np.real(np.diag(Hz))[1:]
    if callable(anisotropy):
        lams = np.asarray(anisotropy(lam0, mu), dtype=complex)
        rule = getattr(anisotropy, "__name__", "custom")
    elif anisotropy == "sqrt":
        lams = np.full(rho.dim - 1, np.sqrt(abs(lam0)), dtype=complex)
        rule = "sqrt"
    elif anisotropy == "levi":
        if np.any(mu <= 0):
            raise ValueError("levi anisotropy needs positive tangential Levi entries")
        lams = np.sqrt(abs(lam0) / mu).astype(complex)
        rule = "levi"
    else:
        raise ValueError(f"unknown anisotropy rule {anisotropy!r}")
    L = AffineMap(np.diag(np.concatenate([[lam0], lams]) ** -1), np.zeros(rho.dim))
    Lam = L @ A
    return AffineMap(Lam.matrix, Lam.translation,
                     {"lambda0": lam0, "lambdas": lams.tolist(), "p": p.tolist(),
                      "rule": rule, "q": q.tolist()})


# ---------------------------------------------------------------------------
# orbits and scaling sequences

ORBIT_FAMILIES = ("ball_mobius", "siegel_dilation", "bp_dilation", "identity")


@dataclass(frozen=True)
class OrbitSpec:
    """An automorphism family phi_nu with orbit phi_nu(base) accumulating at ``point``."""

    domain: DefiningFunction
    base: np.ndarray
    family: str
    point: np.ndarray
    rate: float = 2.0
    direction: Optional[complex] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.family not in ORBIT_FAMILIES:
            raise ValueError(f"unknown orbit family {self.family!r}")
        object.__setattr__(self, "base", as_point(self.base, self.domain.dim))
        object.__setattr__(self, "point", as_point(self.point, self.domain.dim))

    def automorphism(self, nu: int) -> HoloMap:
        d = self.domain.dim
        if self.family == "ball_mobius":
            return ball_automorphism((1.0 - self.rate ** -float(nu)) * self.point)
        if self.family == "siegel_dilation":
            return siegel_dilation(self.rate ** -float(nu), d).as_holomap()
        if self.family == "bp_dilation":
            return bp_model_automorphisms(self.domain.params[0], 0.0, self.rate ** -float(nu))
        return AffineMap.identity(d).as_holomap()

    def orbit_point(self, nu: int) -> np.ndarray:
        return self.automorphism(nu)(self.base)

    def check(self, nu_max: int) -> int:
        """Verify the orbit stays inside and approaches ``point``; return the index
        after which the distance is non-increasing."""
        pts = np.array([self.orbit_point(n) for n in range(1, nu_max + 1)])
        if np.any(self.domain(pts) >= 0):
            raise ValueError("orbit leaves the domain")
        dist = np.linalg.norm(pts - self.point, axis=1)
        bad = np.nonzero(np.diff(dist) > 1e-14)[0]
        return int(bad[-1] + 2) if bad.size else 1

    @classmethod
    def from_mapping(cls, cfg: dict) -> "OrbitSpec":
        from .config import parse_point

        params = []
        if "k" in cfg:
            params.append(int(cfg["k"]))
        if "m" in cfg:
            params.append(int(cfg["m"]))
        dim = int(cfg.get("dim", 2))
        domain = make_catalog_domain(cfg["domain"], params, dim=dim)
        direction = cfg.get("direction")
        return cls(domain=domain,
                   base=parse_point(cfg.get("base", ",".join(["0"] * domain.dim))),
                   family=cfg.get("family", "ball_mobius"),
                   point=parse_point(cfg["point"]),
                   rate=float(cfg.get("rate", 2.0)),
                   direction=None if direction is None else parse_point(direction)[0])


def default_orbit(domain: DefiningFunction) -> OrbitSpec:
    """Standard catalog orbit for the ball, Siegel domain or bp_model."""
    d = domain.dim
    e0 = np.zeros(d)
    e0[0] = 1.0
    if domain.tag == "ball":
        return OrbitSpec(domain, np.zeros(d), "ball_mobius", e0)
    if domain.tag == "siegel":
        return OrbitSpec(domain, e0, "siegel_dilation", np.zeros(d))
    if domain.tag == "bp_model":
        # coordinates (z, w): normal direction is w, which we move to slot 0
        raise ValueError("bp_model orbits need an explicit OrbitSpec")
    raise ValueError(f"no default orbit for {domain.tag!r}")


def pinchuk_scaling_sequence(rho: DefiningFunction, orbit: OrbitSpec, nu_max: int,
                             anisotropy="levi") -> list:
    """sigma_nu = Lambda_nu o phi_nu for nu = 1..nu_max; each sends the base point to e_0."""
    if nu_max > 10 ** 4:
        raise ValueError("nu_max must be <= 10^4")
    out = []
    for nu in range(1, nu_max + 1):
        phi = orbit.automorphism(nu)
        q_nu = phi(orbit.base)
        try:
            Lam = pinchuk_dilatation(rho, q_nu, anisotropy, direction=orbit.direction)
        except ValueError as exc:
            raise ValueError(f"orbit point escapes the normal-form chart at nu={nu}: {exc}") from exc
        sigma = as_holomap(Lam).compose(phi)
        out.append(HoloMap(sigma.func, sigma.jac, sigma.inverse, tag=f"sigma_{nu}",
                           metadata={"nu": nu, "dilatation": Lam, "orbit_point": q_nu}))
    return out


def frankel_scaling(phi: HoloMap, q) -> HoloMap:
    """omega(z) = [d phi(q)]^{-1} (phi(z) - phi(q))."""
    phi = as_holomap(phi)
    q = as_point(q)
    J = np.asarray(phi.jacobian(q))
    if np.linalg.cond(J) > 1e12:
        raise ValueError("Jacobian of phi is singular at q")
    Jinv = np.linalg.inv(J)
    fq = phi(q)

    def f(z):
        return (phi(z) - fq) @ Jinv.T

    def jac(z):
        return Jinv @ phi.jacobian(z)

    inv = None
    if phi.inverse is not None:
        def inv(w):
            return phi.inverse(np.asarray(w) @ J.T + fq)
    return HoloMap(f, jac, inverse=inv, tag="frankel", metadata={"q": q.tolist()})

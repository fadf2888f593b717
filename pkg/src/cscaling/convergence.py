"""Set-convergence diagnostics for scaled domains and Caratheodory kernels."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage

from .geometry import DefiningFunction, make_catalog_domain
from .maps import as_holomap, as_point
from .scaling import OrbitSpec, frankel_scaling, pinchuk_dilatation


@dataclass
class ConvergenceReport:
    """Per-index scalar sequence, fitted limit and pass/fail against a target."""

    indices: list
    values: list
    target: float
    tol: float
    window: int = 1
    columns: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def fitted_limit(self) -> float:
        if not self.values:
            return float("nan")
        return float(np.mean(self.values[-self.window:]))

    @property
    def verdict(self) -> str:
        if not self.values:
            return "na"
        return "pass" if abs(self.fitted_limit - self.target) <= self.tol else "fail"

    @property
    def monotone(self) -> bool:
        v = np.asarray(self.values, dtype=float)
        return bool(np.all(np.diff(v) <= 1e-12 * np.maximum(1.0, np.abs(v[:-1]))))

    def to_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "values": [float(v) for v in self.values],
            "columns": {k: [float(x) for x in v] for k, v in self.columns.items()},
            "fitted_limit": self.fitted_limit,
            "target": self.target,
            "tol": self.tol,
            "window": self.window,
            "verdict": self.verdict,
            "monotone": self.monotone if len(self.values) > 1 else True,
            "metadata": self.metadata,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        a = self.columns.get("deviation_a", self.values)
        b = self.columns.get("deviation_b", [0.0] * len(self.values))
        w.writerow(["index", "deviation_a", "deviation_b", "fitted_limit"])
        for i, x, y in zip(self.indices, a, b):
            w.writerow([i, repr(float(x)), repr(float(y)), repr(self.fitted_limit)])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# normal convergence of scaled domains

def box_samples(lo, hi, n: int, seed: int = 0) -> np.ndarray:
    """Uniform samples of the box prod [lo_i, hi_i] in the real coordinates of C^d."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size // 2
    x = np.random.default_rng(seed).uniform(lo, hi, size=(n, lo.size))
    return x[:, :d] + 1j * x[:, d:]


def domain_samples(rho: DefiningFunction, lo, hi, n: int, seed: int = 0,
                   margin: float = 0.0) -> np.ndarray:
    """Samples of {rho < -margin} inside a box, by rejection."""
    pts = []
    got = 0
    s = seed
    while got < n:
        z = box_samples(lo, hi, 4 * n, s)
        z = z[rho(z) < -margin]
        pts.append(z)
        got += len(z)
        s += 1
        if s - seed > 50:
            raise ValueError("box barely meets the domain")
    return np.concatenate(pts)[:n]


def _pullback(source: DefiningFunction, sigma):
    """rho_source o sigma^{-1} and its complex gradient in the image coordinates."""
    m = as_holomap(sigma)
    if m.inverse is None:
        raise ValueError("maps must be invertible to pull back the source domain")

    def value(z):
        return source(m.inverse(z))

    def grad(z):
        x = m.inverse(z)
        Jx = np.linalg.inv(m.jacobian(x))
        return np.einsum("...k,...kj->...j", source.grad(x), Jx)

    return value, grad


def normal_convergence_check(maps: Sequence, source: DefiningFunction, target: DefiningFunction,
                             compacts, box=None, n_box: int = 4000, seed: int = 0,
                             tol: float = 1e-2, indices=None) -> ConvergenceReport:
    """Deviation of the scaled domains sigma_nu(source) from the target domain.

    (a) max over target-compact samples of the positive part of the pulled
        back defining function, divided by its gradient norm (a first-order
        distance from the scaled domain);
    (b) max over scaled-domain samples in a fixed box of the first-order
        distance to the target.
    """
    K = np.atleast_2d(np.asarray(compacts, dtype=complex))
    if K.size == 0:
        raise ValueError("empty compact sample set")
    if np.any(target(K) >= 0):
        raise ValueError("compact samples must be interior to the target")
    if box is None:
        x = np.concatenate([K.real, K.imag], axis=1)
        mid, half = (x.max(0) + x.min(0)) / 2, (x.max(0) - x.min(0)) / 2 + 0.25
        box = (mid - 1.5 * half, mid + 1.5 * half)
    Z = box_samples(box[0], box[1], n_box, seed)
    tgt_val = target(Z)
    tgt_dist = np.maximum(tgt_val, 0.0) / np.maximum(target.real_gradient_norm(Z), 1e-300)

    dev_a, dev_b = [], []
    for sigma in maps:
        value, grad = _pullback(source, sigma)
        v = value(K)
        gn = 2.0 * np.linalg.norm(grad(K), axis=-1)
        dev_a.append(float(np.max(np.maximum(v, 0.0) / np.maximum(gn, 1e-300))))
        inside = value(Z) < 0
        dev_b.append(float(tgt_dist[inside].max()) if inside.any() else 0.0)
    idx = list(indices) if indices is not None else list(range(1, len(dev_a) + 1))
    vals = [max(a, b) for a, b in zip(dev_a, dev_b)]
    return ConvergenceReport(idx, vals, target=0.0, tol=tol, window=1,
                             columns={"deviation_a": dev_a, "deviation_b": dev_b},
                             metadata={"n_compact": int(len(K)), "n_box": int(n_box),
                                       "seed": seed})


def frankel_pinchuk_compare(rho: DefiningFunction, orbit: OrbitSpec, nus, compact,
                            anisotropy="levi", tol: float = 1e-3) -> ConvergenceReport:
    """Least-squares affine T with T(omega_nu(z)) ~ sigma_nu(z) on the compact; reports
    the sup residual per nu."""
    K = np.atleast_2d(np.asarray(compact, dtype=complex))
    if K.size == 0:
        raise ValueError("empty compact sample set")
    nus = [nus] if np.isscalar(nus) else list(nus)
    residuals, fits = [], []
    for nu in nus:
        phi = orbit.automorphism(nu)
        Lam = pinchuk_dilatation(rho, phi(orbit.base), anisotropy, direction=orbit.direction)
        sigma = as_holomap(Lam).compose(phi)
        omega = frankel_scaling(phi, orbit.base)
        X = np.column_stack([omega(K), np.ones(len(K))])
        Y = sigma(K)
        coef, _, rank, _ = np.linalg.lstsq(X, Y, rcond=None)
        if rank < X.shape[1]:
            raise ValueError("degenerate affine fit: sample set is rank deficient")
        residuals.append(float(np.max(np.linalg.norm(X @ coef - Y, axis=1))))
        fits.append({"matrix": coef[:-1].T.tolist(), "translation": coef[-1].tolist()})
    return ConvergenceReport(nus, residuals, target=0.0, tol=tol, window=1,
                             columns={"deviation_a": residuals},
                             metadata={"n_compact": int(len(K))})


# ---------------------------------------------------------------------------
# Caratheodory kernel

@dataclass(frozen=True)
class DomainSequence:
    """nu -> defining function (vectorized callable) of the nu-th domain."""

    dim: int
    member: Callable[[int], Callable]
    label: str = ""

    def __call__(self, nu: int) -> Callable:
        return self.member(nu)


def ball_sequence(radius: Callable[[int], float], dim: int = 1, label: str = "") -> DomainSequence:
    """Balls B(0, radius(nu))."""

    def member(nu):
        r = radius(nu)
        return lambda z: np.sum(np.abs(z) ** 2, axis=-1) - r * r

    return DomainSequence(dim, member, label)


def constant_sequence(rho) -> DomainSequence:
    return DomainSequence(rho.dim, lambda nu: rho, getattr(rho, "tag", "constant"))


SEQUENCES = {
    "growing_ball": lambda dim: ball_sequence(lambda n: 1.0 + 1.0 / n, dim, "B(0, 1 + 1/nu)"),
    "shrinking_ball": lambda dim: ball_sequence(lambda n: 1.0 / n, dim, "B(0, 1/nu)"),
}


def sequence_from_name(name: str, dim: int = 1, params=()) -> DomainSequence:
    if name in SEQUENCES:
        return SEQUENCES[name](dim)
    if name.startswith("constant:"):
        return constant_sequence(make_catalog_domain(name.split(":", 1)[1], params, dim=dim))
    raise ValueError(f"unknown domain sequence {name!r}")


@dataclass(frozen=True)
class GridSpec:
    """Regular grid of spacing ``spacing`` on [lo, hi] in each of the 2d real coordinates."""

    dim: int
    lo: float = -1.2
    hi: float = 1.2
    spacing: float = 0.02

    def axes(self):
        n = int(round((self.hi - self.lo) / self.spacing)) + 1
        return np.linspace(self.lo, self.hi, n)

    def points(self) -> np.ndarray:
        ax = self.axes()
        mesh = np.meshgrid(*([ax] * (2 * self.dim)), indexing="ij")
        x = np.stack(mesh, axis=-1)
        return x[..., :self.dim] + 1j * x[..., self.dim:]


@dataclass
class KernelEstimate:
    grid: GridSpec
    points: np.ndarray
    marked: np.ndarray
    p: np.ndarray
    horizon: int
    window: int
    degenerate: bool

    @property
    def marked_points(self) -> np.ndarray:
        return self.points[self.marked]

    def to_dict(self) -> dict:
        return {"p": np.stack([self.p.real, self.p.imag], -1).tolist(),
                "horizon": self.horizon, "window": self.window,
                "degenerate": self.degenerate, "n_marked": int(self.marked.sum()),
                "n_grid": int(self.marked.size),
                "grid": {"dim": self.grid.dim, "lo": self.grid.lo, "hi": self.grid.hi,
                         "spacing": self.grid.spacing}}


def _extrapolation_weights(nus, degree):
    """Weights w with sum_i w_i f(nu_i) = value at 1/nu = 0 of the least-squares
    polynomial in 1/nu."""
    x = 1.0 / np.asarray(nus, dtype=float)
    V = np.vander(x, degree + 1, increasing=True)
    return np.linalg.pinv(V)[0]


def caratheodory_kernel_estimate(domains: DomainSequence, p, grid: GridSpec,
                                 horizon: int = 200, window: int = 5,
                                 tol: float = 1e-12) -> KernelEstimate:
    """Grid estimate of the Caratheodory kernel of the sequence at p.

    A grid point is kept while it lies in the segment-connected grid
    component of {rho_nu < 0} containing p and the defining values over the
    trailing ``window`` indices extrapolate (quadratically in 1/nu) to a
    negative limit. Indices before ``window`` are exempt. If p itself is not
    kept the kernel is {p}.
    """
    if horizon < window:
        raise ValueError("horizon must be at least the persistence window")
    p = as_point(p, grid.dim)
    pts = grid.points()
    ax = grid.axes()
    coords = np.concatenate([p.real, p.imag])
    idx = tuple(int(np.argmin(np.abs(ax - c))) for c in coords)
    degree = min(2, window - 1)
    hist = []
    keep = np.ones(pts.shape[:-1], dtype=bool)
    for nu in range(1, horizon + 1):
        vals = np.asarray(domains(nu)(pts), dtype=float)
        hist.append(vals)
        if len(hist) > window:
            hist.pop(0)
        if nu < window:
            continue
        mask = vals < 0
        labels, _ = ndimage.label(mask)
        comp = (labels == labels[idx]) & mask[idx]
        w = _extrapolation_weights(range(nu - window + 1, nu + 1), degree)
        limit = np.tensordot(w, np.stack(hist), axes=1)
        keep &= comp & (limit < -tol)
    degenerate = not keep[idx]
    if degenerate:
        keep = np.zeros_like(keep)
        keep[idx] = True
    return KernelEstimate(grid, pts, keep, p, horizon, window, degenerate)

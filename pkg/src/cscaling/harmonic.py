"""Poisson kernel of the unit ball in R^{n+1} and a scan of its two-sided
boundary-distance bound."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .convergence import ConvergenceReport


def sphere_measure(n: int) -> float:
    """Surface measure omega_n of the unit sphere S^n in R^{n+1}."""
    return float(2 * np.pi ** ((n + 1) / 2) / gamma((n + 1) / 2))


@dataclass(frozen=True)
class PoissonQuery:
    x: np.ndarray
    y: np.ndarray

    @property
    def delta(self) -> float:
        return 1.0 - float(np.linalg.norm(self.x))


def poisson_ball(x, y, n: int = None):
    """P(x, y) = (1 - |x|^2) / (omega_n |x - y|^{n+1}); broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[-1] - 1 if n is None else n
    if x.shape[-1] != n + 1 or y.shape[-1] != n + 1:
        raise ValueError("points must live in R^{n+1}")
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 >= 1.0):
        raise ValueError("x must lie strictly inside the unit ball")
    if np.any(np.abs(np.linalg.norm(y, axis=-1) - 1.0) > 1e-12):
        raise ValueError("y must lie on the unit sphere")
    dist = np.linalg.norm(x - y, axis=-1)
    return (1.0 - r2) / (sphere_measure(n) * dist ** (n + 1))


def boundary_integral(x, n: int = None, rtol: float = 1e-12) -> float:
    """Integral of P(x, .) over the unit sphere.

    The kernel depends only on the angle between x and y, so the integral
    reduces to one dimension: omega_{n-1} int_0^pi P(theta) sin^{n-1} theta d theta,
    with omega_0 = 2 covering the circle.
    """
    x = np.asarray(x, dtype=float)
    n = x.size - 1 if n is None else n
    r = float(np.linalg.norm(x))
    if r >= 1:
        raise ValueError("x must lie strictly inside the unit ball")
    w = sphere_measure(n)

    def P(theta):
        return (1 - r) * (1 + r) / (w * ((1 - r) ** 2 + 4 * r * np.sin(theta / 2) ** 2) ** ((n + 1) / 2))

    inner = sphere_measure(n - 1)
    # panels graded geometrically away from the peak of width 1 - |x| at theta = 0
    edges = np.r_[0.0, (1 - r) * 2.0 ** np.arange(0, 64), np.pi]
    edges = np.unique(np.clip(edges, 0, np.pi))
    val = sum(integrate.quad(lambda t: P(t) * np.sin(t) ** (n - 1), a, b,
                             epsabs=1e-3 * rtol, epsrel=rtol, limit=200)[0]
              for a, b in zip(edges[:-1], edges[1:]))
    return float(inner * val)


def sphere_points(n: int, m: int) -> np.ndarray:
    """Deterministic points on S^n: the circle for n = 1, a golden spiral for n = 2."""
    if n == 1:
        th = np.arange(m) * (2 * np.pi / m)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n == 2:
        k = np.arange(m) + 0.5
        z = 1 - 2 * k / m
        ph = np.pi * (1 + 5 ** 0.5) * k
        s = np.sqrt(1 - z * z)
        return np.stack([s * np.cos(ph), s * np.sin(ph), z], axis=1)
    raise ValueError("sphere grids implemented for n = 1, 2")


@dataclass(frozen=True)
class PoissonGrid:
    """Interior points on radii (0 and geometric steps toward 1 - r_gap) times
    sphere directions, against boundary points."""

    n: int = 1
    n_radii: int = 12
    r_gap: float = 1e-4
    n_dirs: int = 16
    n_boundary: int = 64

    def radii(self):
        if self.n_radii <= 1:
            return np.zeros(1)
        gaps = np.geomspace(1.0, self.r_gap, self.n_radii)
        return 1.0 - gaps

    def interior(self) -> np.ndarray:
        dirs = sphere_points(self.n, self.n_dirs)
        return (self.radii()[:, None, None] * dirs[None]).reshape(-1, self.n + 1)

    def boundary(self) -> np.ndarray:
        return sphere_points(self.n, self.n_boundary)

    def refined(self) -> "PoissonGrid":
        return PoissonGrid(self.n, self.n_radii, self.r_gap, 2 * self.n_dirs, 2 * self.n_boundary)


@dataclass
class PoissonScan:
    c1_hat: float
    c2_hat: float
    report: ConvergenceReport
    rows: np.ndarray

    @property
    def verdict(self) -> str:
        return "pass" if self.report.metadata["ok"] else "fail"

    def to_dict(self):
        return {"c1_hat": self.c1_hat, "c2_hat": self.c2_hat,
                "envelope": [self.report.metadata["envelope_low"],
                             self.report.metadata["envelope_high"]],
                "verdict": self.verdict, "report": self.report.to_dict()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = (self.rows.shape[1] - 2) // 2
        w.writerow(["x", "y", "P", "ratio"])
        for row in self.rows:
            w.writerow([" ".join(repr(float(v)) for v in row[:d]),
                        " ".join(repr(float(v)) for v in row[d:2 * d]),
                        repr(float(row[-2])), repr(float(row[-1]))])
        return buf.getvalue()


def _scan(grid: PoissonGrid, X=None):
    X = grid.interior() if X is None else X
    Y = grid.boundary()
    if X.size == 0 or Y.size == 0:
        raise ValueError("empty grid")
    P = poisson_ball(X[:, None, :], Y[None, :, :], grid.n)
    delta = 1.0 - np.linalg.norm(X, axis=1)
    dist = np.linalg.norm(X[:, None, :] - Y[None, :, :], axis=-1)
    ratio = P * dist ** (grid.n + 1) / delta[:, None]
    rows = np.concatenate([np.repeat(X, len(Y), 0), np.tile(Y, (len(X), 1)),
                           P.reshape(-1, 1), ratio.reshape(-1, 1)], axis=1)
    return float(ratio.min()), float(ratio.max()), rows


def poisson_bound_scan(n: int = 1, grid: PoissonGrid = None, points=None,
                       tol: float = 1e-6) -> PoissonScan:
    """c1_hat = min and c2_hat = max of P |x - y|^{n+1} / delta(x) over the grid.

    Passes when 0 < c1_hat <= c2_hat < inf and both constants agree with a
    refined grid to ``tol`` (relative).
    """
    grid = grid or PoissonGrid(n=n)
    X = None if points is None else np.atleast_2d(np.asarray(points, dtype=float))
    c1, c2, rows = _scan(grid, X)
    c1r, c2r, _ = _scan(grid.refined(), X)
    w = sphere_measure(grid.n)
    stable = abs(c1r - c1) <= tol * c1 and abs(c2r - c2) <= tol * c2
    ok = 0 < c1 <= c2 < np.inf and stable
    rep = ConvergenceReport(["coarse", "refined"], [c2 / c1, c2r / c1r],
                            target=c2 / c1, tol=tol * c2 / c1,
                            columns={"deviation_a": [c1, c1r], "deviation_b": [c2, c2r]},
                            metadata={"n": grid.n, "envelope_low": 1 / w, "envelope_high": 2 / w,
                                      "stable": bool(stable), "ok": bool(ok)})
    return PoissonScan(c1, c2, rep, rows)

"""Wu metric: the minimum-volume Hermitian ellipsoid around the Kobayashi indicatrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .invmetrics import kobayashi_closed_form
from .maps import as_point

MAX_ITER = 100_000


@dataclass(frozen=True)
class IndicatrixSample:
    """Unit Kobayashi vectors at q over a deterministic sphere grid (closed unit sublevel)."""

    tag: str
    q: np.ndarray
    vectors: np.ndarray
    resolution: int

    @property
    def count(self) -> int:
        return len(self.vectors)


@dataclass
class WuEllipsoid:
    """E_H = {v : v* H v <= 1}; ``volume`` is the proxy 1/det H."""

    H: np.ndarray
    support: np.ndarray
    iterations: int
    gap: float
    metadata: dict = field(default_factory=dict)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.H).real)

    @property
    def volume(self) -> float:
        return 1.0 / self.det

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=complex)
        return np.einsum("...i,ij,...j->...", v.conj(), self.H, v).real

    def to_dict(self) -> dict:
        return {"H": np.stack([self.H.real, self.H.imag], -1).tolist(), "det": self.det,
                "support": [int(i) for i in self.support], "iterations": self.iterations,
                "gap": self.gap, "metadata": self.metadata}


def sphere_grid(dim: int, m: int) -> np.ndarray:
    """Unit vectors (cos a, sin a * u') with a = k pi / (2m), k = 0..m, and a phase
    e^{i theta} on the new factor, theta = 2 pi j / m; u' recursively in C^{dim-1}.

    The leading coordinate is kept real, which loses nothing for circled sets.
    """
    if dim == 1:
        return np.ones((1, 1), dtype=complex)
    a = np.arange(m + 1) * (np.pi / 2 / m)
    th = np.arange(m) * (2 * np.pi / m)
    tail = sphere_grid(dim - 1, m)
    out = []
    for ak in a:
        if np.isclose(np.sin(ak), 0.0):
            out.append(np.r_[1.0, np.zeros(dim - 1)].astype(complex))
            continue
        for t in th:
            for u in tail:
                out.append(np.r_[np.cos(ak), np.sin(ak) * np.exp(1j * t) * u])
    return np.asarray(out)


def indicatrix_sample(tag: str, q, resolution: int = 32) -> IndicatrixSample:
    """v = u / F_K(q, u) for grid directions u, exact by homogeneity."""
    q = as_point(q)
    U = sphere_grid(q.size, resolution)
    F = np.array([kobayashi_closed_form(tag, q, u).value for u in U])
    if np.any(F <= 1e-14):
        raise ValueError("indicatrix is unbounded (metric degenerates)")
    return IndicatrixSample(tag, q, U / F[:, None], resolution)


def mvee_hermitian(samples, tol: float = 1e-8, max_iter: int = MAX_ITER) -> WuEllipsoid:
    """Maximum-determinant Hermitian H with v* H v <= 1 on every sample.

    Khachiyan's barycentric ascent on complex scatter matrices with
    Todd-Yildirim away steps; H = X^{-1} / d for the weighted scatter X,
    rescaled at the end so containment holds exactly.
    """
    V = samples.vectors if isinstance(samples, IndicatrixSample) else np.asarray(samples, complex)
    n, d = V.shape
    if n < 2 * d:
        raise ValueError("need at least 2d sample points")
    if np.linalg.matrix_rank(V, tol=1e-10 * np.abs(V).max()) < d:
        raise ValueError("samples do not span C^d (rank deficient)")
    u = np.full(n, 1.0 / n)
    it = 0
    while True:
        X = (V.T * u) @ V.conj()
        Xi = np.linalg.inv(X)
        M = np.einsum("ij,jk,ik->i", V.conj(), Xi, V).real
        j = int(np.argmax(M))
        live = u > 0
        k = int(np.flatnonzero(live)[np.argmin(M[live])])
        up, down = M[j] / d - 1.0, 1.0 - M[k] / d
        # after rescaling, the log-det duality gap is d log(1 + up)
        if up <= tol:
            break
        it += 1
        if it > max_iter:
            raise ValueError("iteration cap reached")
        if up >= down:
            s = (M[j] - d) / (d * (M[j] - 1.0))
            u *= 1.0 - s
            u[j] += s
        else:
            # drop the point entirely when M_k <= 1 (no interior optimum)
            drop = u[k] / (1.0 - u[k])
            s = drop if M[k] <= 1.0 else min((d - M[k]) / (d * (M[k] - 1.0)), drop)
            u *= 1.0 + s
            u[k] -= s
            u[u < 1e-300] = 0.0
    H = Xi / d
    H = 0.5 * (H + H.conj().T)
    worst = np.max(np.einsum("ij,jk,ik->i", V.conj(), H, V).real)
    H = H / worst
    gap = float(d * np.log(worst) if worst > 0 else np.inf)
    support = np.flatnonzero(u > tol)
    return WuEllipsoid(H, support, it, abs(gap), {"n_samples": n, "tol": tol})


def wu_metric(tag: str, q, resolution: int = 32, tol: float = 1e-8, refine: bool = True,
              det_tol: float = 1e-6, max_resolution: int = 128) -> WuEllipsoid:
    """Wu form h_q, refining the sphere grid by doubling until det H settles."""
    res = resolution
    E = mvee_hermitian(indicatrix_sample(tag, q, res), tol)
    while refine and res * 2 <= max_resolution:
        res *= 2
        E2 = mvee_hermitian(indicatrix_sample(tag, q, res), tol)
        change = abs(E2.det - E.det) / E.det
        E = E2
        if change < det_tol:
            break
    E.metadata.update({"tag": tag, "resolution": res,
                       "q": np.stack([as_point(q).real, as_point(q).imag], -1).tolist()})
    return E

"""Complex affine maps and holomorphic maps of C^d.

Points are numpy complex arrays of shape ``(..., d)``; every map here is
vectorized over the leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np


def as_point(coords, dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``coords`` to a finite complex vector, optionally of length ``dim``."""
    z = np.atleast_1d(np.asarray(coords, dtype=complex))
    if z.ndim != 1:
        raise ValueError("a point must be a 1-d sequence of complex numbers")
    if dim is not None and z.shape[0] != dim:
        raise ValueError(f"expected a point of dimension {dim}, got {z.shape[0]}")
    if not np.all(np.isfinite(z)):
        raise ValueError("point has non-finite coordinates")
    return z


@dataclass(frozen=True)
class AffineMap:
    """z -> M z + b on C^d."""

    matrix: np.ndarray
    translation: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        b = np.asarray(self.translation, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or b.shape != (M.shape[0],):
            raise ValueError("matrix must be d x d and translation a d-vector")
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "translation", b)

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def translation_by(cls, b) -> "AffineMap":
        b = as_point(b)
        return cls(np.eye(b.size), b)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z @ self.matrix.T + self.translation

    def jacobian(self, z):
        z = np.asarray(z, dtype=complex)
        return np.broadcast_to(self.matrix, z.shape[:-1] + self.matrix.shape)

    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def compose(self, other: "AffineMap") -> "AffineMap":
        """Return ``self o other``."""
        return AffineMap(self.matrix @ other.matrix,
                         self.matrix @ other.translation + self.translation)

    __matmul__ = compose

    def inverse(self) -> "AffineMap":
        if abs(self.det()) <= 1e-14:
            raise ValueError("affine map is not invertible")
        Minv = np.linalg.inv(self.matrix)
        return AffineMap(Minv, -Minv @ self.translation, dict(self.metadata))

    def as_holomap(self) -> "HoloMap":
        inv = self.inverse()
        return HoloMap(self, self.jacobian, inverse=inv, tag="affine")


@dataclass(frozen=True)
class HoloMap:
    """A holomorphic map given by an evaluator and its complex Jacobian."""

    func: Callable
    jac: Callable
    inverse: Optional[Callable] = None
    tag: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __call__(self, z):
        return self.func(np.asarray(z, dtype=complex))

    def jacobian(self, z):
        return self.jac(np.asarray(z, dtype=complex))

    def compose(self, other) -> "HoloMap":
        """Return ``self o other`` (``other`` may be an AffineMap)."""
        first = other if isinstance(other, HoloMap) else other.as_holomap()

        def f(z):
            return self.func(first.func(z))

        def jac(z):
            return self.jac(first.func(z)) @ first.jac(z)

        inv = None
        if self.inverse is not None and first.inverse is not None:
            def inv(w):
                return first.inverse(self.inverse(w))
        return HoloMap(f, jac, inverse=inv, tag=f"{self.tag}*{first.tag}")


def as_holomap(m) -> HoloMap:
    return m if isinstance(m, HoloMap) else m.as_holomap()


def finite_difference_jacobian(f: Callable, z, h: float = 1e-6) -> np.ndarray:
    """Central differences of a holomorphic map along the real coordinate axes."""
    z = as_point(z)
    d = z.size
    cols = []
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = h
        cols.append((np.asarray(f(z + e)) - np.asarray(f(z - e))) / (2 * h))
    return np.stack(cols, axis=-1)

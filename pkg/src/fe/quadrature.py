from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray  # (q, dim) in [-1, 1]^dim
    weights: np.ndarray  # (q,)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.weights.shape[0]

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Contract the leading (point) axis of ``values`` against the weights."""
        return np.tensordot(self.weights, values, axes=(0, 0))


@lru_cache(maxsize=None)
def gauss_rule(q: int, dim: int) -> QuadratureRule:
    """Tensor Gauss-Legendre rule with ``q`` points per axis, exact for Q_{2q-1}; axis 0 varies fastest."""
    if q < 1:
        raise ValueError(f"Quadrature needs q >= 1 points per axis, got {q}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    x, w = leggauss(q)
    pts = []
    wts = []
    for idx in itertools.product(range(q), repeat=dim):
        idx = idx[::-1]
        pts.append([x[i] for i in idx])
        wts.append(np.prod([w[i] for i in idx]))
    points = np.asarray(pts, dtype=float)
    weights = np.asarray(wts, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(points=points, weights=weights)

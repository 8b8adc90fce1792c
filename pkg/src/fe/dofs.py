"""Degrees of freedom on the reference cell [-1, 1]^dim.

Vertex DOFs are point values. Every higher-dimensional entity carries moments
against scaled Legendre products in its own coordinates: total degree at most
``k - 2d`` on a d-dimensional entity for S_k, degree at most ``k - 2`` per
axis for Q_k. Reference entities are enumerated exactly like the entities of a
one-cell structured mesh, so local and global numbering agree class by class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import legvander

from src.fe.polynomials import _check, graded_lex_key
from src.fe.quadrature import gauss_rule
from src.mesh.structured import StructuredMesh

ENTITY_KINDS = ("vertex", "edge", "face", "cell")


@dataclass(frozen=True, eq=False)
class DofFunctional:
    kind: str
    class_index: int  # entity class on the reference cell (same ordering as the mesh)
    entity: int  # id within that class
    moment: tuple[int, ...]  # Legendre degrees along the entity's free axes; () for vertex values
    points: np.ndarray  # (q, dim) reference coordinates
    weights: np.ndarray  # (q,)

    @property
    def moment_degree(self) -> int:
        return sum(self.moment)

    def apply(self, values: np.ndarray) -> np.ndarray:
        """``values`` holds f at ``self.points`` along axis 0."""
        return np.tensordot(self.weights, values, axes=(0, 0))


@lru_cache(maxsize=None)
def reference_cell(dim: int) -> StructuredMesh:
    return StructuredMesh(dim=dim, cells_per_axis=(1,) * dim, lower=(-1.0,) * dim, upper=(1.0,) * dim)


def moment_indices(family: str, k: int, entity_dim: int) -> list[tuple[int, ...]]:
    """Legendre multi-indices carried by one entity of dimension ``entity_dim``."""
    fam = _check(family, k, max(entity_dim, 1))
    if entity_dim == 0:
        return [()]
    if fam == "Q":
        if k < 2:
            return []
        idx = list(itertools.product(range(k - 1), repeat=entity_dim))
    elif fam == "S":
        top = k - 2 * entity_dim
        if top < 0:
            return []
        idx = [j for j in itertools.product(range(top + 1), repeat=entity_dim) if sum(j) <= top]
    else:
        raise ValueError(f"No DOF functionals defined for family '{family}'")
    return sorted(idx, key=graded_lex_key)


def dofs_per_entity(family: str, k: int, entity_dim: int) -> int:
    return len(moment_indices(family, k, entity_dim))


def _moment_functional(
    cell: StructuredMesh, class_index: int, entity: int, j: tuple[int, ...], k: int
) -> tuple[np.ndarray, np.ndarray]:
    cls = cell.entity_classes[class_index]
    offset = [int(g) for g in cls.unravel(np.array(entity))]
    free = cls.free_axes
    line = gauss_rule(k + 1, len(free))
    q = len(line)
    pts = np.empty((q, cell.dim))
    for a in range(cell.dim):
        if a in free:
            pts[:, a] = line.points[:, free.index(a)]
        else:
            pts[:, a] = -1.0 + 2.0 * offset[a]
    w = np.array(line.weights, copy=True)
    for slot, deg in enumerate(j):
        t = line.points[:, slot]
        w *= legvander(t, deg)[:, deg] * (2 * deg + 1) / 2.0
    return pts, w


@lru_cache(maxsize=None)
def build_dof_functionals(family: str, k: int, dim: int) -> tuple[DofFunctional, ...]:
    """Functionals ordered entity-class-major, then entity id, then moment index."""
    fam = _check(family, k, dim)
    if fam == "P":
        raise ValueError("Simplicial P_k elements have no structured-cell DOF functionals")
    cell = reference_cell(dim)
    out: list[DofFunctional] = []
    for ci, cls in enumerate(cell.entity_classes):
        kind = "cell" if cls.dim == dim else ENTITY_KINDS[cls.dim]
        for e in range(cls.count):
            if cls.dim == 0:
                pts = cell.grid_coordinates(cls.unravel(np.array([e])))
                out.append(
                    DofFunctional(kind, ci, e, (), pts.reshape(1, dim), np.ones(1))
                )
                continue
            for j in moment_indices(fam, k, cls.dim):
                pts, w = _moment_functional(cell, ci, e, j, k)
                out.append(DofFunctional(kind, ci, e, j, pts, w))
    return tuple(out)

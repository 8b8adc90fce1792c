"""Dual (nodal) bases on the reference cell built from a generalized Vandermonde matrix."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np

from src.fe.dofs import DofFunctional, build_dof_functionals, dofs_per_entity, reference_cell
from src.fe.polynomials import PolySpace, _check, monomial_gradients, monomial_values
from src.fe.quadrature import QuadratureRule

logger = logging.getLogger(__name__)

SUPPORTED_DEGREES = range(1, 7)
MAX_VANDERMONDE_COND = 1e12


class BasisConstructionError(RuntimeError):
    """DOF functionals are not unisolvent (or too ill-conditioned) on the requested space."""


@dataclass(frozen=True, eq=False)
class ElementBasis:
    space: PolySpace
    functionals: tuple[DofFunctional, ...]
    coefficients: np.ndarray  # (monomials, basis): column j expands phi_j
    vandermonde_cond: float

    @property
    def family(self) -> str:
        return self.space.family

    @property
    def degree(self) -> int:
        return self.space.degree

    @property
    def dim(self) -> int:
        return self.space.dim

    def __len__(self) -> int:
        return len(self.functionals)

    @property
    def ndofs(self) -> int:
        return len(self.functionals)

    # ─── local layout ─────────────────────────────────────────────────
    @cached_property
    def entity_dofs(self) -> tuple[int, ...]:
        """DOFs per entity, indexed by reference entity class."""
        cell = reference_cell(self.dim)
        return tuple(dofs_per_entity(self.family, self.degree, c.dim) for c in cell.entity_classes)

    # ─── tabulation ───────────────────────────────────────────────────
    def tabulate(self, points: np.ndarray) -> np.ndarray:
        """Basis values, shape (points, ndofs)."""
        return monomial_values(self.space.exponents, points) @ self.coefficients

    def tabulate_gradients(self, points: np.ndarray) -> np.ndarray:
        """Reference gradients, shape (points, ndofs, dim)."""
        g = monomial_gradients(self.space.exponents, points)
        return np.einsum("pmd,mj->pjd", g, self.coefficients)

    @cached_property
    def _rule_cache(self) -> dict[bytes, tuple[np.ndarray, np.ndarray]]:
        return {}

    def tabulate_rule(self, rule: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
        """Cached (values, gradients) at the points of a quadrature rule."""
        key = rule.points.tobytes()
        hit = self._rule_cache.get(key)
        if hit is None:
            vals = self.tabulate(rule.points)
            grads = self.tabulate_gradients(rule.points)
            vals.setflags(write=False)
            grads.setflags(write=False)
            hit = self._rule_cache[key] = (vals, grads)
        return hit

    # ─── functionals ──────────────────────────────────────────────────
    def apply_functionals(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Evaluate every DOF functional on ``f``; vector-valued f gives shape (ndofs, components)."""
        out = [fn.apply(np.asarray(f(fn.points), dtype=float)) for fn in self.functionals]
        return np.asarray(out)

    def interpolate(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return self.apply_functionals(f)

    def evaluate(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        return self.tabulate(points) @ coeffs

    @cached_property
    def functional_matrix(self) -> np.ndarray:
        """Row i: functional i applied to each basis function (the identity for a dual basis)."""
        return np.vstack([fn.weights @ self.tabulate(fn.points) for fn in self.functionals])


def vandermonde(space: PolySpace, functionals: tuple[DofFunctional, ...]) -> np.ndarray:
    exps = space.exponents
    return np.vstack([fn.weights @ monomial_values(exps, fn.points) for fn in functionals])


@lru_cache(maxsize=None)
def build_basis(family: str, k: int, dim: int) -> ElementBasis:
    fam = _check(family, k, dim)
    if k not in SUPPORTED_DEGREES:
        raise ValueError(f"Degree {k} outside supported range 1..6")
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    space = PolySpace(fam, k, dim)
    functionals = build_dof_functionals(fam, k, dim)
    if len(functionals) != len(space):
        raise BasisConstructionError(
            f"{space.name}: {len(functionals)} functionals for a space of dimension {len(space)}"
        )
    V = vandermonde(space, functionals)
    try:
        cond = float(np.linalg.cond(V))
        coeffs = np.linalg.inv(V)
    except np.linalg.LinAlgError as exc:
        raise BasisConstructionError(f"{space.name}: singular Vandermonde matrix") from exc
    if not np.isfinite(cond) or cond > MAX_VANDERMONDE_COND:
        raise BasisConstructionError(f"{space.name}: Vandermonde condition number {cond:.3e} exceeds 1e12")
    coeffs.setflags(write=False)
    logger.debug("Built %s basis, %d dofs, cond(V)=%.3e", space.name, len(space), cond)
    return ElementBasis(space=space, functionals=functionals, coefficients=coeffs, vandermonde_cond=cond)

"""Polynomial spaces, DOF functionals, reference bases and quadrature."""

from src.fe.basis import BasisConstructionError, ElementBasis, build_basis
from src.fe.dofs import DofFunctional, build_dof_functionals, dofs_per_entity, moment_indices
from src.fe.polynomials import (
    Monomial,
    PolySpace,
    dim_space,
    enumerate_monomials,
    superlinear_degree,
)
from src.fe.quadrature import QuadratureRule, gauss_rule

__all__ = [
    "BasisConstructionError",
    "DofFunctional",
    "ElementBasis",
    "Monomial",
    "PolySpace",
    "QuadratureRule",
    "build_basis",
    "build_dof_functionals",
    "dim_space",
    "dofs_per_entity",
    "enumerate_monomials",
    "gauss_rule",
    "moment_indices",
    "superlinear_degree",
]

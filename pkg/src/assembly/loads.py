"""Load vectors, manufactured solutions, global interpolation and error norms."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from src.assembly.boundary import constrained_dofs
from src.assembly.dofmap import DofMap
from src.assembly.forms import ProblemSpec
from src.fe.polynomials import monomial_values
from src.fe.quadrature import gauss_rule
from src.mesh.structured import StructuredMesh

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray], np.ndarray]
_CHUNK_VALUES = 2_000_000


# ─── manufactured solutions ───────────────────────────────────────────
# Forcing terms are the hand-derived -laplace(u); see docs/manufactured_forcing.md.


def _exp_sin_2d(x: np.ndarray) -> np.ndarray:
    X, Y = x[..., 0], x[..., 1]
    return np.exp(X * Y) * np.sin(3 * np.pi * X) * np.sin(4 * np.pi * Y)


def _exp_sin_2d_forcing(x: np.ndarray) -> np.ndarray:
    X, Y = x[..., 0], x[..., 1]
    a, b = 3 * np.pi, 4 * np.pi
    s1, c1 = np.sin(a * X), np.cos(a * X)
    s2, c2 = np.sin(b * Y), np.cos(b * Y)
    lap = np.exp(X * Y) * (
        (X * X + Y * Y - a * a - b * b) * s1 * s2 + 2 * a * Y * c1 * s2 + 2 * b * X * s1 * c2
    )
    return -lap


def _exp_sin_3d(x: np.ndarray) -> np.ndarray:
    X, Y, Z = x[..., 0], x[..., 1], x[..., 2]
    return np.exp(X * Y * Z) * np.sin(2 * np.pi * X) * np.sin(3 * np.pi * Y) * np.sin(4 * np.pi * Z)


def _exp_sin_3d_forcing(x: np.ndarray) -> np.ndarray:
    X, Y, Z = x[..., 0], x[..., 1], x[..., 2]
    a, b, c = 2 * np.pi, 3 * np.pi, 4 * np.pi
    s1, c1 = np.sin(a * X), np.cos(a * X)
    s2, c2 = np.sin(b * Y), np.cos(b * Y)
    s3, c3 = np.sin(c * Z), np.cos(c * Z)
    lap = np.exp(X * Y * Z) * (
        ((Y * Z) ** 2 + (X * Z) ** 2 + (X * Y) ** 2 - a * a - b * b - c * c) * s1 * s2 * s3
        + 2 * a * Y * Z * c1 * s2 * s3
        + 2 * b * X * Z * s1 * c2 * s3
        + 2 * c * X * Y * s1 * s2 * c3
    )
    return -lap


@dataclass(frozen=True)
class ManufacturedSolution:
    name: str
    dim: int
    exact: Field
    forcing: Field


MANUFACTURED: dict[str, ManufacturedSolution] = {
    "exp_sin_2d": ManufacturedSolution("exp_sin_2d", 2, _exp_sin_2d, _exp_sin_2d_forcing),
    "exp_sin_3d": ManufacturedSolution("exp_sin_3d", 3, _exp_sin_3d, _exp_sin_3d_forcing),
}


def get_manufactured(name: str) -> ManufacturedSolution:
    try:
        return MANUFACTURED[name]
    except KeyError:
        raise ValueError(f"Unknown manufactured solution '{name}', expected one of {sorted(MANUFACTURED)}") from None


def forcing_field(spec: ProblemSpec, dim: int) -> Field:
    """Right-hand-side field f(x) for a problem; vector-valued for elasticity."""
    vd = spec.value_dim(dim)
    key = spec.forcing
    if key == "zero":
        return lambda x: np.zeros(x.shape[:-1] + ((vd,) if vd > 1 else ()))
    if key == "constant":
        if vd > 1:
            return lambda x: np.full(x.shape[:-1] + (vd,), spec.forcing_value)
        return lambda x: np.full(x.shape[:-1], spec.forcing_value)
    if key == "gravity":
        if vd == 1:
            raise ValueError("Gravity forcing needs a vector-valued (elasticity) problem")

        def gravity(x: np.ndarray) -> np.ndarray:
            out = np.zeros(x.shape[:-1] + (vd,))
            out[..., vd - 1] = -spec.forcing_value
            return out

        return gravity
    sol = get_manufactured(key)
    if sol.dim != dim:
        raise ValueError(f"Manufactured solution '{key}' is {sol.dim}D, mesh is {dim}D")
    if vd != 1:
        raise ValueError(f"Manufactured solution '{key}' is scalar, problem is {spec.kind}")
    return sol.forcing


# ─── load vector ──────────────────────────────────────────────────────


def _cell_chunks(ncell: int, per_cell: int):
    step = max(1, _CHUNK_VALUES // max(per_cell, 1))
    for start in range(0, ncell, step):
        yield np.arange(start, min(ncell, start + step))


def assemble_load(mesh: StructuredMesh, dofmap: DofMap, f: Field, q: int | None = None) -> np.ndarray:
    """b_i = integral of f . phi_i, summed over cells with ``numpy.bincount``."""
    basis = dofmap.basis
    vd = dofmap.value_dim
    rule = gauss_rule(q or basis.degree + 2, mesh.dim)
    vals, _ = basis.tabulate_rule(rule)
    w = rule.weights * float(np.prod(mesh.spacing / 2.0))
    b = np.zeros(dofmap.ndofs)
    for cells in _cell_chunks(mesh.num_cells, len(rule) * basis.ndofs):
        x = mesh.reference_to_physical(cells, rule.points)
        fx = np.asarray(f(x), dtype=float).reshape(len(cells), len(rule), vd)
        loc = np.einsum("q,qi,cqk->cik", w, vals, fx).reshape(len(cells), -1)
        loc *= dofmap.cell_signs[cells]
        b += np.bincount(dofmap.cell_dofs[cells].ravel(), weights=loc.ravel(), minlength=dofmap.ndofs)
    return b


def assemble_rhs(
    mesh: StructuredMesh, basis, dofmap: DofMap, spec: ProblemSpec, apply_bcs: bool = True
) -> np.ndarray:
    b = assemble_load(mesh, dofmap, forcing_field(spec, mesh.dim))
    if apply_bcs:
        b[constrained_dofs(dofmap, spec.dirichlet)] = 0.0
    return b


# ─── interpolation and evaluation ─────────────────────────────────────


def interpolate(mesh: StructuredMesh, dofmap: DofMap, f: Field) -> np.ndarray:
    """Canonical interpolant: every global DOF functional applied to ``f``."""
    basis = dofmap.basis
    vd = dofmap.value_dim
    fns = basis.functionals
    pts = np.vstack([fn.points for fn in fns])
    owner = np.repeat(np.arange(len(fns)), [len(fn.weights) for fn in fns])
    wts = np.concatenate([fn.weights for fn in fns])
    W = sp.csr_matrix((wts, (owner, np.arange(len(wts)))), shape=(len(fns), len(wts)))
    u = np.zeros(dofmap.ndofs)
    for cells in _cell_chunks(mesh.num_cells, len(wts) * vd):
        x = mesh.reference_to_physical(cells, pts)
        fx = np.asarray(f(x), dtype=float).reshape(len(cells), len(wts), vd)
        loc = (W @ fx.transpose(1, 0, 2).reshape(len(wts), -1)).reshape(len(fns), len(cells), vd)
        loc = loc.transpose(1, 0, 2).reshape(len(cells), -1) * dofmap.cell_signs[cells]
        u[dofmap.cell_dofs[cells].ravel()] = loc.ravel()
    return u


def locate_points(mesh: StructuredMesh, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Owning cell and reference coordinates of physical points inside the mesh box."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lo = np.asarray(mesh.lower)
    h = mesh.spacing
    n = np.asarray(mesh.cells_per_axis)
    idx = np.clip(np.floor((pts - lo) / h).astype(np.int64), 0, n - 1)
    cells = mesh.entity_classes[-1].ravel([idx[:, a] for a in range(mesh.dim)])
    ref = 2.0 * (pts - (lo + idx * h)) / h - 1.0
    return cells, ref


def evaluate(mesh: StructuredMesh, dofmap: DofMap, u: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Sample a discrete function at physical points; shape (points,) or (points, value_dim)."""
    basis = dofmap.basis
    vd = dofmap.value_dim
    cells, ref = locate_points(mesh, points)
    phi = monomial_values(basis.space.exponents, ref) @ basis.coefficients
    coef = (u[dofmap.cell_dofs[cells]] * dofmap.cell_signs[cells]).reshape(len(cells), basis.ndofs, vd)
    out = np.einsum("pi,pik->pk", phi, coef)
    return out[:, 0] if vd == 1 else out


def l2_error(mesh: StructuredMesh, dofmap: DofMap, u: np.ndarray, exact: Field, q: int | None = None) -> float:
    """L2 norm of u_h - exact with a (k+3)-point rule per axis."""
    basis = dofmap.basis
    vd = dofmap.value_dim
    rule = gauss_rule(q or basis.degree + 3, mesh.dim)
    vals, _ = basis.tabulate_rule(rule)
    w = rule.weights * float(np.prod(mesh.spacing / 2.0))
    total = 0.0
    for cells in _cell_chunks(mesh.num_cells, len(rule) * basis.ndofs * vd):
        coef = (u[dofmap.cell_dofs[cells]] * dofmap.cell_signs[cells]).reshape(len(cells), basis.ndofs, vd)
        uh = np.einsum("qi,cik->cqk", vals, coef)
        x = mesh.reference_to_physical(cells, rule.points)
        ue = np.asarray(exact(x), dtype=float).reshape(len(cells), len(rule), vd)
        total += float(np.einsum("q,cqk->", w, (uh - ue) ** 2))
    return float(np.sqrt(total))

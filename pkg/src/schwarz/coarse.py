"""Q_1 coarse space of the two-level preconditioner.

The columns of R0 are the unconstrained bilinear vertex functions written in
the fine basis (their canonical interpolants, exact because Q_1 is contained
in every fine space); A0 = R0^T A R0 is checked against a direct Q_1 assembly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.assembly.boundary import constrained_mask
from src.assembly.dofmap import DofMap, build_dofmap
from src.assembly.forms import ProblemSpec, assemble_operator
from src.fe.basis import build_basis
from src.mesh.structured import dirichlet_vertex_mask

logger = logging.getLogger(__name__)

COARSE_SOLVERS = ("direct", "q1mg")
GALERKIN_ATOL = 1e-10


class CoarseSpaceMismatchError(RuntimeError):
    """Galerkin coarse operator disagrees with the directly assembled Q_1 operator."""


def dedupe_triplets(rows: np.ndarray, cols: np.ndarray, vals: np.ndarray, shape: tuple[int, int],
                    prune: float = 1e-13) -> sp.csr_matrix:
    """CSR matrix from triplets keeping the first value of every repeated (row, col) pair."""
    keys = rows.astype(np.int64) * shape[1] + cols.astype(np.int64)
    _, first = np.unique(keys, return_index=True)
    r, c, v = rows[first], cols[first], vals[first]
    keep = np.abs(v) > prune
    return sp.csr_matrix((v[keep], (r[keep], c[keep])), shape=shape)


def q1_inclusion(dofmap: DofMap) -> sp.csr_matrix:
    """Scalar inclusion of Q_1 vertex functions into the fine space, shape (fine scalar dofs, vertices)."""
    q1 = build_basis("Q", 1, dofmap.mesh.dim)
    T = dofmap.basis.apply_functionals(q1.tabulate)  # (fine local, 2^dim)
    cell_v = dofmap.mesh.cell_vertices  # same lexicographic corner order as the Q_1 basis
    fine = dofmap.cell_scalar_dofs
    signs = dofmap.cell_scalar_signs
    ncell, nloc = fine.shape
    rows = np.broadcast_to(fine[:, :, None], (ncell, nloc, T.shape[1])).ravel()
    cols = np.broadcast_to(cell_v[:, None, :], (ncell, nloc, T.shape[1])).ravel()
    vals = (T[None, :, :] * signs[:, :, None]).ravel()
    return dedupe_triplets(rows, cols, vals, (dofmap.num_scalar_dofs, dofmap.mesh.num_vertices))


def vector_kron(R: sp.csr_matrix, value_dim: int) -> sp.csr_matrix:
    if value_dim == 1:
        return R.tocsr()
    return sp.kron(R, sp.identity(value_dim, format="csr"), format="csr")


@dataclass(frozen=True, eq=False)
class CoarseSpace:
    dofmap: DofMap  # Q_1 numbering on the fine mesh
    columns: np.ndarray  # retained (unconstrained) Q_1 dofs
    R0: sp.csr_matrix  # (fine dofs, len(columns))
    A0: sp.csr_matrix
    solver: Callable[[np.ndarray], np.ndarray]
    kind: str
    deviation: float

    @property
    def size(self) -> int:
        return int(self.R0.shape[1])

    def restrict(self, r: np.ndarray) -> np.ndarray:
        return self.R0.T @ r

    def prolong(self, x0: np.ndarray) -> np.ndarray:
        return self.R0 @ x0

    def apply(self, r: np.ndarray) -> np.ndarray:
        """R0 A0^{-1} R0^T r."""
        if self.size == 0:
            return np.zeros_like(r)
        return self.prolong(self.solver(self.restrict(r)))


def _direct_solver(A0: sp.csr_matrix) -> Callable[[np.ndarray], np.ndarray]:
    if A0.shape[0] == 0:
        return lambda r: r.copy()
    lu = splu(A0.tocsc())
    return lu.solve


def build_coarse_space(
    mesh,
    basis,
    dofmap: DofMap,
    A: sp.csr_matrix,
    spec: ProblemSpec,
    coarse_solver: str = "direct",
    hierarchy=None,
    validate: bool = True,
) -> CoarseSpace:
    if coarse_solver not in COARSE_SOLVERS:
        raise ValueError(f"Unknown coarse solver '{coarse_solver}', expected one of {COARSE_SOLVERS}")
    vd = dofmap.value_dim
    q1 = build_basis("Q", 1, mesh.dim)
    q1_map = build_dofmap(mesh, q1, vd)

    fixed_v = dirichlet_vertex_mask(mesh, spec.dirichlet)
    columns = q1_map.expand(np.flatnonzero(~fixed_v))
    free_fine = ~constrained_mask(dofmap, spec.dirichlet)

    R = vector_kron(q1_inclusion(dofmap), vd)
    R0 = (sp.diags(free_fine.astype(float)) @ R[:, columns]).tocsr()
    R0.eliminate_zeros()
    A0 = (R0.T @ A @ R0).tocsr()
    A0 = (0.5 * (A0 + A0.T)).tocsr()

    deviation = 0.0
    if validate:
        direct = assemble_operator(mesh, q1, q1_map, spec)[columns][:, columns]
        diff = abs(A0 - direct)
        deviation = float(diff.max()) if diff.nnz else 0.0
        scale = max(1.0, float(abs(direct).max()) if direct.nnz else 0.0)
        logger.info("Coarse space: %d dofs, Galerkin vs direct Q1 deviation %.3e", len(columns), deviation)
        if deviation > GALERKIN_ATOL * scale:
            raise CoarseSpaceMismatchError(
                f"Galerkin coarse operator deviates from direct Q1 assembly by {deviation:.3e}"
            )

    if coarse_solver == "direct":
        solver = _direct_solver(A0)
    else:
        from src.multigrid.q1 import q1_multigrid_solver

        solver = q1_multigrid_solver(mesh, spec, columns, hierarchy=hierarchy)
    return CoarseSpace(
        dofmap=q1_map, columns=columns, R0=R0, A0=A0, solver=solver, kind=coarse_solver, deviation=deviation
    )

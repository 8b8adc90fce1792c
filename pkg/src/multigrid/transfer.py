"""Prolongation between uniformly refined levels by canonical interpolation.

Fine child ``s`` (one bit per axis, x fastest) of a coarse cell sees the
coarse reference coordinates ``(xi_f - 1) / 2 + s``, so every fine DOF
functional can be applied to the coarse basis functions directly.
"""

from __future__ import annotations

import itertools
import logging

import numpy as np
import scipy.sparse as sp

from src.assembly.boundary import Selector, constrained_mask
from src.assembly.dofmap import DofMap
from src.mesh.hierarchy import MeshHierarchy
from src.schwarz.coarse import dedupe_triplets, vector_kron

logger = logging.getLogger(__name__)


def child_transfer_matrices(coarse_basis, fine_basis) -> list[np.ndarray]:
    """T_s[i, a]: fine functional i applied to coarse basis function a, one matrix per child."""
    dim = fine_basis.dim
    out = []
    for bits in itertools.product((0, 1), repeat=dim):
        shift = np.asarray(bits[::-1], dtype=float)
        T = fine_basis.apply_functionals(lambda pts, s=shift: coarse_basis.tabulate((pts - 1.0) / 2.0 + s))
        out.append(T)
    return out


def _check_nested(coarse: DofMap, fine: DofMap) -> None:
    cm, fm = coarse.mesh, fine.mesh
    if cm.dim != fm.dim:
        raise ValueError(f"Levels have different dimensions: {cm.dim} vs {fm.dim}")
    if tuple(2 * n for n in cm.cells_per_axis) != tuple(fm.cells_per_axis):
        raise ValueError(f"Mesh {fm.descriptor} is not the uniform refinement of {cm.descriptor}")
    if cm.lower != fm.lower or cm.upper != fm.upper:
        raise ValueError("Levels cover different boxes")
    if coarse.value_dim != fine.value_dim:
        raise ValueError(f"value_dim differs between levels: {coarse.value_dim} vs {fine.value_dim}")
    cb, fb = coarse.basis, fine.basis
    nested = (cb.family, cb.degree) == (fb.family, fb.degree) or (cb.family, cb.degree) == ("Q", 1) or (
        fb.family == "Q" and fb.degree >= cb.degree
    )
    if not nested:
        raise ValueError(
            f"{cb.family}_{cb.degree} on the coarse level is not contained in {fb.family}_{fb.degree} on the fine level"
        )


def build_prolongation(coarse: DofMap, fine: DofMap, dirichlet: Selector = None) -> sp.csr_matrix:
    """Sparse P (fine dofs x coarse dofs); rows and columns of Dirichlet DOFs are zero."""
    _check_nested(coarse, fine)
    hier = MeshHierarchy(levels=(coarse.mesh, fine.mesh))
    children = hier.child_cells(0)  # (coarse cells, 2^dim)
    Ts = child_transfer_matrices(coarse.basis, fine.basis)
    cdofs, csigns = coarse.cell_scalar_dofs, coarse.cell_scalar_signs
    rows, cols, vals = [], [], []
    for s, T in enumerate(Ts):
        f = children[:, s]
        fd, fs = fine.cell_scalar_dofs[f], fine.cell_scalar_signs[f]
        nf, nc = T.shape
        rows.append(np.broadcast_to(fd[:, :, None], (len(f), nf, nc)).ravel())
        cols.append(np.broadcast_to(cdofs[:, None, :], (len(f), nf, nc)).ravel())
        vals.append((T[None] * fs[:, :, None] * csigns[:, None, :]).ravel())
    P = dedupe_triplets(
        np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
        (fine.num_scalar_dofs, coarse.num_scalar_dofs),
    )
    P = vector_kron(P, fine.value_dim)
    if dirichlet is not None:
        keep_rows = (~constrained_mask(fine, dirichlet)).astype(float)
        keep_cols = (~constrained_mask(coarse, dirichlet)).astype(float)
        P = (sp.diags(keep_rows) @ P @ sp.diags(keep_cols)).tocsr()
        P.eliminate_zeros()
    logger.debug("Prolongation %s -> %s: %s, nnz=%d", coarse.mesh.descriptor, fine.mesh.descriptor, P.shape, P.nnz)
    return P

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from src.assembly.dofmap import DofMap
from src.mesh.structured import resolve_facets

logger = logging.getLogger(__name__)

Selector = str | Sequence[str] | None


def constrained_scalar_dofs(dofmap: DofMap, selector: Selector) -> np.ndarray:
    mesh = dofmap.mesh
    facets = resolve_facets(selector, mesh.dim)
    if not facets:
        return np.zeros(0, dtype=np.int64)
    out = []
    for ci in range(len(mesh.entity_classes)):
        if dofmap.basis.entity_dofs[ci] == 0:
            continue
        ents = np.flatnonzero(mesh.entities_on_facets(ci, facets))
        if ents.size:
            out.append(dofmap.entity_scalar_dofs(ci, ents).ravel())
    return np.sort(np.concatenate(out)) if out else np.zeros(0, dtype=np.int64)


def constrained_dofs(dofmap: DofMap, selector: Selector) -> np.ndarray:
    """Sorted global DOFs supported on the closure of the selected boundary facets."""
    return dofmap.expand(constrained_scalar_dofs(dofmap, selector))


def constrained_mask(dofmap: DofMap, selector: Selector) -> np.ndarray:
    mask = np.zeros(dofmap.ndofs, dtype=bool)
    mask[constrained_dofs(dofmap, selector)] = True
    return mask


def apply_dirichlet(
    A: sp.csr_matrix, b: np.ndarray | None, dofmap: DofMap, selector: Selector
) -> tuple[sp.csr_matrix, np.ndarray | None]:
    """Symmetric elimination of homogeneous Dirichlet DOFs, in place.

    Constrained rows and columns are dropped from the sparsity pattern except
    for a unit diagonal; the matching rhs entries are zeroed.
    """
    if not sp.issparse(A) or A.format != "csr":
        raise ValueError(f"apply_dirichlet needs a CSR matrix, got {type(A).__name__}")
    mask = constrained_mask(dofmap, selector)
    if not mask.any():
        return A, b
    n = A.shape[0]
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    cols = A.indices
    hit = mask[rows] | mask[cols]
    diag = (rows == cols) & mask[rows]
    keep = ~hit | diag
    data = A.data.copy()
    data[diag] = 1.0
    A.data = data[keep]
    A.indices = cols[keep]
    A.indptr = np.concatenate([[0], np.cumsum(np.bincount(rows[keep], minlength=n))]).astype(A.indptr.dtype)
    if b is not None:
        b[mask] = 0.0
    logger.info("Dirichlet elimination: %d of %d dofs constrained", int(mask.sum()), n)
    return A, b

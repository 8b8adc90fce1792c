"""Bilinear forms and sparse operator assembly.

Every cell of a structured box mesh is a translate of the same box, so one
local matrix serves the whole mesh; it is scattered through chunked COO
triplets and summed into CSR.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from src.assembly.dofmap import DofMap
from src.fe.basis import ElementBasis
from src.fe.quadrature import gauss_rule

logger = logging.getLogger(__name__)

PROBLEM_KINDS = ("poisson", "elasticity")
_CHUNK_ENTRIES = 4_000_000


def lame_from_young(E: float, nu: float, plane_stress: bool = True) -> tuple[float, float]:
    """(lambda, mu) from Young's modulus and Poisson ratio."""
    if E <= 0:
        raise ValueError(f"Young's modulus must be positive, got {E}")
    if not -1.0 < nu < 0.5:
        raise ValueError(f"Poisson ratio must lie in (-1, 0.5), got {nu}")
    mu = E / (2.0 * (1.0 + nu))
    if plane_stress:
        lam = E * nu / (1.0 - nu * nu)
    else:
        lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return lam, mu


@dataclass(frozen=True)
class ProblemSpec:
    kind: str = "poisson"
    forcing: str = "zero"  # manufactured id, "constant", "gravity" or "zero"
    dirichlet: str | tuple[str, ...] = "all"
    lam: float = 0.0
    mu: float = 1.0
    forcing_value: float = 1.0  # constant f for poisson, g for gravity

    def __post_init__(self) -> None:
        if self.kind not in PROBLEM_KINDS:
            raise ValueError(f"Unknown problem kind '{self.kind}', expected one of {PROBLEM_KINDS}")
        if self.kind == "elasticity":
            if self.mu <= 0:
                raise ValueError(f"Elasticity needs mu > 0, got {self.mu}")
            if self.lam < 0:
                raise ValueError(f"Elasticity needs lambda >= 0, got {self.lam}")
        if not isinstance(self.dirichlet, str):
            object.__setattr__(self, "dirichlet", tuple(self.dirichlet))

    def value_dim(self, dim: int) -> int:
        return dim if self.kind == "elasticity" else 1


# ─── local matrices ───────────────────────────────────────────────────


def physical_gradients(basis: ElementBasis, spacing: Sequence[float], q: int | None = None):
    """Physical gradients at the stiffness rule and the scaled weights ``w * det J``."""
    rule = gauss_rule(q or basis.degree + 1, basis.dim)
    _, grads = basis.tabulate_rule(rule)
    h = np.asarray(spacing, dtype=float)
    detj = float(np.prod(h / 2.0))
    return grads * (2.0 / h)[None, None, :], rule.weights * detj


def gradient_products(basis: ElementBasis, spacing: Sequence[float]) -> np.ndarray:
    """G[a, b, i, j] = integral of d_a phi_i * d_b phi_j over one cell."""
    g, w = physical_gradients(basis, spacing)
    return np.einsum("q,qia,qjb->abij", w, g, g)


def local_stiffness(basis: ElementBasis, spacing: Sequence[float], spec: ProblemSpec | None = None) -> np.ndarray:
    spec = spec or ProblemSpec()
    G = gradient_products(basis, spacing)
    dim = basis.dim
    L = np.einsum("aaij->ij", G)
    if spec.kind == "poisson":
        K = L
    else:
        n = basis.ndofs
        K4 = np.zeros((n, dim, n, dim))
        for d in range(dim):
            for c in range(dim):
                blk = spec.mu * G[c, d] + spec.lam * G[d, c]
                if c == d:
                    blk = blk + spec.mu * L
                K4[:, d, :, c] = blk
        K = K4.reshape(n * dim, n * dim)
    return 0.5 * (K + K.T)


# ─── global scatter ───────────────────────────────────────────────────


def scatter_local_matrix(dofmap: DofMap, K: np.ndarray) -> sp.csr_matrix:
    """Sum a per-cell local matrix into a global CSR matrix, honoring orientation signs."""
    dofs = dofmap.cell_dofs
    signs = dofmap.cell_signs
    ncell, nloc = dofs.shape
    n = dofmap.ndofs
    uniform = bool(np.all(signs == 1.0))
    chunk = max(1, _CHUNK_ENTRIES // (nloc * nloc))
    parts: list[sp.csr_matrix] = []
    for start in range(0, ncell, chunk):
        d = dofs[start:start + chunk]
        rows = np.broadcast_to(d[:, :, None], (d.shape[0], nloc, nloc)).ravel()
        cols = np.broadcast_to(d[:, None, :], (d.shape[0], nloc, nloc)).ravel()
        if uniform:
            vals = np.broadcast_to(K[None], (d.shape[0], nloc, nloc)).ravel()
        else:
            s = signs[start:start + chunk]
            vals = (K[None] * s[:, :, None] * s[:, None, :]).ravel()
        parts.append(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr())
    # pairwise sum of the chunk matrices
    while len(parts) > 1:
        parts = [parts[i] + parts[i + 1] if i + 1 < len(parts) else parts[i] for i in range(0, len(parts), 2)]
    A = parts[0] if parts else sp.csr_matrix((n, n))
    A.sum_duplicates()
    A.sort_indices()
    return A.tocsr()


def assemble_operator(mesh, basis: ElementBasis, dofmap: DofMap, spec: ProblemSpec) -> sp.csr_matrix:
    """Global stiffness matrix of the Poisson or linear elasticity form, before boundary conditions."""
    if dofmap.value_dim != spec.value_dim(mesh.dim):
        raise ValueError(
            f"DofMap value_dim={dofmap.value_dim} does not fit a {spec.kind} problem in {mesh.dim}D"
        )
    K = local_stiffness(basis, mesh.spacing, spec)
    A = scatter_local_matrix(dofmap, K)
    logger.info(
        "Assembled %s %s_%d operator on %s mesh: n=%d, nnz=%d",
        spec.kind, basis.family, basis.degree, mesh.descriptor, A.shape[0], A.nnz,
    )
    return A

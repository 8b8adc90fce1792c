"""Symmetric V(1,1) multigrid with per-level assembled operators.

Every level keeps its full DOF space; Dirichlet DOFs carry identity rows in
the operator and zero rows/columns in the prolongation, so corrections never
touch them.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, splu
from tqdm import tqdm

from src.assembly.boundary import apply_dirichlet, constrained_mask
from src.assembly.dofmap import DofMap, build_dofmap
from src.assembly.forms import ProblemSpec, assemble_operator
from src.fe.basis import build_basis
from src.mesh.hierarchy import MeshHierarchy
from src.multigrid.smoothers import (
    PatchSmoother,
    build_chebyshev_smoother,
    estimate_smoother_scaling,
)
from src.multigrid.transfer import build_prolongation
from src.schwarz.asm import AsmPreconditioner
from src.schwarz.patches import build_patches

logger = logging.getLogger(__name__)

SMOOTHERS = ("patch", "chebyshev")
GALERKIN_RTOL = 1e-9


class NestednessError(RuntimeError):
    """Directly assembled coarse operator disagrees with the Galerkin product P^T A P."""


@dataclass(eq=False)
class MgLevel:
    dofmap: DofMap
    A: sp.csr_matrix
    free: np.ndarray
    smoother: Any = None  # None on the coarsest level
    P: sp.csr_matrix | None = None  # from the next coarser level

    @property
    def mesh(self):
        return self.dofmap.mesh

    @property
    def ndofs(self) -> int:
        return self.dofmap.ndofs


@dataclass(eq=False)
class MgPreconditioner:
    levels: list[MgLevel]
    coarse_factor: Any
    presmooth: int = 1
    postsmooth: int = 1
    setup_seconds: float = field(default=0.0, compare=False)

    @property
    def shape(self) -> tuple[int, int]:
        n = self.levels[-1].ndofs
        return (n, n)

    def apply(self, r: np.ndarray) -> np.ndarray:
        return v_cycle(self, r)

    __call__ = apply

    def matvec(self, r: np.ndarray) -> np.ndarray:
        return self.apply(np.asarray(r, dtype=float).reshape(-1))

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.matvec, dtype=float)

    @property
    def omegas(self) -> list[float]:
        return [float(getattr(lv.smoother, "omega", float("nan"))) for lv in self.levels[1:]]


def v_cycle(mg: MgPreconditioner, residual: np.ndarray, level: int | None = None) -> np.ndarray:
    """One symmetric V-cycle from a zero initial guess; the coarsest level is solved directly."""
    lv_index = len(mg.levels) - 1 if level is None else level
    lv = mg.levels[lv_index]
    if lv_index == 0:
        return mg.coarse_factor.solve(residual)
    x = np.zeros_like(residual)
    for _ in range(mg.presmooth):
        x += lv.smoother.smooth(lv.A, residual - lv.A @ x)
    res = residual - lv.A @ x
    x += lv.P @ v_cycle(mg, lv.P.T @ res, lv_index - 1)
    for _ in range(mg.postsmooth):
        x += lv.smoother.smooth(lv.A, residual - lv.A @ x)
    return x


def assemble_level(mesh, family: str, k: int, spec: ProblemSpec) -> tuple[DofMap, sp.csr_matrix, np.ndarray]:
    basis = build_basis(family, k, mesh.dim)
    dofmap = build_dofmap(mesh, basis, spec.value_dim(mesh.dim))
    A = assemble_operator(mesh, basis, dofmap, spec)
    apply_dirichlet(A, None, dofmap, spec.dirichlet)
    return dofmap, A, ~constrained_mask(dofmap, spec.dirichlet)


def check_galerkin(A_coarse: sp.csr_matrix, A_fine: sp.csr_matrix, P: sp.csr_matrix, free: np.ndarray) -> float:
    """Relative max deviation of P^T A P from the directly assembled coarse operator on free DOFs."""
    idx = np.flatnonzero(free)
    gal = (P.T @ A_fine @ P).tocsr()[idx][:, idx]
    direct = A_coarse[idx][:, idx]
    diff = abs(gal - direct)
    dev = float(diff.max()) if diff.nnz else 0.0
    scale = float(abs(direct).max()) if direct.nnz else 1.0
    rel = dev / max(scale, np.finfo(float).tiny)
    if rel > GALERKIN_RTOL:
        raise NestednessError(f"Galerkin product deviates from the assembled coarse operator by {rel:.3e} (relative)")
    return rel


def _make_smoother(kind: str, lv_A, mesh, dofmap, spec, free, omega):
    if kind == "patch":
        patches = build_patches(lv_A, mesh, dofmap, spec.dirichlet)
        asm = AsmPreconditioner(patches=patches)
        if omega in (None, "auto"):
            asm.omega = estimate_smoother_scaling(lv_A, asm, free=free)
        else:
            asm.omega = float(omega)
        return PatchSmoother(asm)
    return build_chebyshev_smoother(lv_A, free=free)


def build_multigrid(
    hierarchy: MeshHierarchy,
    family: str,
    k: int,
    spec: ProblemSpec,
    smoother: str = "patch",
    omega: float | str | None = "auto",
    check_nested: bool = True,
    levels: list[tuple[DofMap, sp.csr_matrix, np.ndarray]] | None = None,
    progress: bool = False,
) -> MgPreconditioner:
    """V(1,1) preconditioner on a refinement hierarchy, finest level last."""
    if smoother not in SMOOTHERS:
        raise ValueError(f"Unknown smoother '{smoother}', expected one of {SMOOTHERS}")
    t0 = time.perf_counter()
    assembled = levels or [assemble_level(m, family, k, spec) for m in hierarchy.levels]
    out: list[MgLevel] = []
    it = enumerate(assembled)
    if progress:
        it = tqdm(list(it), desc="mg levels", leave=False)
    for i, (dofmap, A, free) in it:
        lv = MgLevel(dofmap=dofmap, A=A, free=free)
        if i > 0:
            prev = out[-1]
            lv.P = build_prolongation(prev.dofmap, dofmap, spec.dirichlet)
            if check_nested:
                rel = check_galerkin(prev.A, A, lv.P, prev.free)
                logger.info("Level %d: Galerkin deviation %.2e", i, rel)
            lv.smoother = _make_smoother(smoother, A, dofmap.mesh, dofmap, spec, free, omega)
        out.append(lv)
    factor = splu(out[0].A.tocsc())
    mg = MgPreconditioner(levels=out, coarse_factor=factor)
    mg.setup_seconds = time.perf_counter() - t0
    logger.info("Multigrid: %d levels, finest n=%d, setup %.2fs", len(out), out[-1].ndofs, mg.setup_seconds)
    return mg

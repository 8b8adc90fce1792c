from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from src.assembly.boundary import Selector
from src.assembly.dofmap import DofMap
from src.assembly.forms import ProblemSpec
from src.schwarz.coarse import CoarseSpace, build_coarse_space
from src.schwarz.patches import PatchSet, build_patches

logger = logging.getLogger(__name__)

ASM_MODES = ("patch", "two-level")


@dataclass(eq=False)
class AsmPreconditioner:
    """C^{-1} r = omega * sum_i R_i A_i^{-1} R_i^T r (+ R0 A0^{-1} R0^T r in two-level mode)."""

    patches: PatchSet
    coarse: CoarseSpace | None = None
    omega: float = 1.0
    setup_seconds: float = field(default=0.0, compare=False)

    @property
    def mode(self) -> str:
        return "two-level" if self.coarse is not None else "patch"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.patches.ndofs, self.patches.ndofs)

    def apply(self, r: np.ndarray) -> np.ndarray:
        y = self.patches.apply(r)
        if self.omega != 1.0:
            y *= self.omega
        if self.coarse is not None:
            y += self.coarse.apply(r)
        return y

    __call__ = apply

    def matvec(self, r: np.ndarray) -> np.ndarray:
        return self.apply(np.asarray(r, dtype=float).reshape(-1))

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.matvec, dtype=float)


def apply_asm(pc: AsmPreconditioner, residual: np.ndarray) -> np.ndarray:
    return pc.apply(residual)


def build_asm(
    A: sp.csr_matrix,
    mesh,
    dofmap: DofMap,
    spec: ProblemSpec,
    mode: str = "two-level",
    coarse_solver: str = "direct",
    omega: float = 1.0,
    hierarchy=None,
    dirichlet: Selector | None = None,
) -> AsmPreconditioner:
    """Patch-only or two-level additive Schwarz preconditioner for a Dirichlet-eliminated operator."""
    if mode not in ASM_MODES:
        raise ValueError(f"Unknown ASM mode '{mode}', expected one of {ASM_MODES}")
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    t0 = time.perf_counter()
    selector = spec.dirichlet if dirichlet is None else dirichlet
    patches = build_patches(A, mesh, dofmap, selector)
    coarse = None
    if mode == "two-level":
        coarse = build_coarse_space(
            mesh, dofmap.basis, dofmap, A, spec, coarse_solver=coarse_solver, hierarchy=hierarchy
        )
    pc = AsmPreconditioner(patches=patches, coarse=coarse, omega=omega)
    pc.setup_seconds = time.perf_counter() - t0
    logger.info("ASM (%s) setup in %.2fs", pc.mode, pc.setup_seconds)
    return pc

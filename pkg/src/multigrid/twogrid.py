"""Multiplicative two-level Schwarz: patch smoothing around a Q_1 coarse correction on the same mesh.

One application, from a zero initial guess:

    x  = S r
    x += R0 A0^{-1} R0^T (r - A x)
    x += S (r - A x)

S is a Chebyshev-accelerated vertex-patch smoother, so the cycle is
symmetric and can precondition CG.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from src.assembly.boundary import Selector, constrained_mask
from src.assembly.dofmap import DofMap
from src.assembly.forms import ProblemSpec
from src.multigrid.smoothers import ChebyshevSmoother, build_chebyshev_smoother
from src.schwarz.asm import AsmPreconditioner
from src.schwarz.coarse import CoarseSpace, build_coarse_space
from src.schwarz.patches import build_patches

logger = logging.getLogger(__name__)

SMOOTHING_STEPS = 2


@dataclass(eq=False)
class TwoGridPreconditioner:
    A: sp.csr_matrix
    smoother: ChebyshevSmoother
    coarse: CoarseSpace
    patch_asm: AsmPreconditioner
    setup_seconds: float = field(default=0.0, compare=False)

    mode = "multiplicative"

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def apply(self, r: np.ndarray) -> np.ndarray:
        x = self.smoother.smooth(self.A, r)
        x += self.coarse.apply(r - self.A @ x)
        x += self.smoother.smooth(self.A, r - self.A @ x)
        return x

    __call__ = apply

    def matvec(self, r: np.ndarray) -> np.ndarray:
        return self.apply(np.asarray(r, dtype=float).reshape(-1))

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.matvec, dtype=float)


def build_two_grid(
    A: sp.csr_matrix,
    mesh,
    dofmap: DofMap,
    spec: ProblemSpec,
    coarse_solver: str = "direct",
    steps: int = SMOOTHING_STEPS,
    hierarchy=None,
    dirichlet: Selector | None = None,
) -> TwoGridPreconditioner:
    """Chebyshev(``steps``)-patch / Q_1 coarse / Chebyshev(``steps``)-patch cycle."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    t0 = time.perf_counter()
    selector = spec.dirichlet if dirichlet is None else dirichlet
    free = ~constrained_mask(dofmap, selector)
    asm = AsmPreconditioner(patches=build_patches(A, mesh, dofmap, selector))
    smoother = build_chebyshev_smoother(A, free=free, steps=steps, precondition=asm.apply)
    coarse = build_coarse_space(mesh, dofmap.basis, dofmap, A, spec, coarse_solver=coarse_solver, hierarchy=hierarchy)
    pc = TwoGridPreconditioner(A=A, smoother=smoother, coarse=coarse, patch_asm=asm)
    pc.setup_seconds = time.perf_counter() - t0
    logger.info(
        "Two-grid (multiplicative) setup in %.2fs: %d patches, %d coarse dofs, Chebyshev [%.3f, %.3f]",
        pc.setup_seconds, len(asm.patches), coarse.size, smoother.lower, smoother.upper,
    )
    return pc

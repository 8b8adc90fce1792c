"""Level smoothers. Each maps a residual to a correction from a zero initial guess and is symmetric."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from src.krylov.lanczos import estimate_extreme_eigenvalues
from src.schwarz.asm import AsmPreconditioner

logger = logging.getLogger(__name__)

OMEGA_MIN = 1.0 / 8.0
OMEGA_MAX = 1.0
SCALING_STEPS = 15
CHEBYSHEV_STEPS = 10


def estimate_smoother_scaling(A: sp.csr_matrix, smoother: AsmPreconditioner, free: np.ndarray | None = None,
                              steps: int = SCALING_STEPS) -> float:
    """omega = 1 / lambda_max(C^{-1} A), clipped to [1/8, 1]."""
    saved = smoother.omega
    smoother.omega = 1.0
    try:
        _, lmax = estimate_extreme_eigenvalues(A, smoother, steps=steps, free=free)
    finally:
        smoother.omega = saved
    omega = float(np.clip(1.0 / lmax, OMEGA_MIN, OMEGA_MAX)) if lmax > 0 else OMEGA_MAX
    logger.info("Smoother scaling: lambda_max(C^-1 A) ~ %.4f -> omega = %.4f", lmax, omega)
    return omega


@dataclass(eq=False)
class PatchSmoother:
    asm: AsmPreconditioner

    @property
    def omega(self) -> float:
        return self.asm.omega

    def smooth(self, A: sp.csr_matrix, r: np.ndarray) -> np.ndarray:
        return self.asm.apply(r)


@dataclass(eq=False)
class ChebyshevSmoother:
    """``steps`` Chebyshev iterations for B A on [lower, upper], B the inner preconditioner.

    The result is a fixed polynomial in B A applied to B r, so it is symmetric
    whenever B is.
    """

    precondition: Callable[[np.ndarray], np.ndarray]
    lower: float
    upper: float
    steps: int = 2

    def smooth(self, A: sp.csr_matrix, r: np.ndarray) -> np.ndarray:
        theta = 0.5 * (self.upper + self.lower)
        delta = 0.5 * (self.upper - self.lower)
        sigma = theta / delta
        rho_old = 1.0 / sigma
        d = self.precondition(r) / theta
        x = d.copy()
        for _ in range(self.steps - 1):
            res = r - A @ x
            rho = 1.0 / (2.0 * sigma - rho_old)
            d = rho * rho_old * d + (2.0 * rho / delta) * self.precondition(res)
            x += d
            rho_old = rho
        return x


def build_chebyshev_smoother(A: sp.csr_matrix, free: np.ndarray | None = None, steps: int = 2,
                             lanczos_steps: int = CHEBYSHEV_STEPS,
                             precondition: Callable[[np.ndarray], np.ndarray] | None = None) -> ChebyshevSmoother:
    """Interval [0.1, 1.1] * lambda_max(B A); B defaults to Jacobi."""
    if precondition is None:
        diag = A.diagonal()
        if np.any(diag <= 0):
            raise ValueError("Chebyshev-Jacobi smoothing needs a positive diagonal")
        inv_diag = 1.0 / diag

        def precondition(r: np.ndarray) -> np.ndarray:
            return inv_diag * r

    _, lmax = estimate_extreme_eigenvalues(A, precondition, steps=lanczos_steps, free=free)
    if not lmax > 0:
        raise ValueError(f"Chebyshev interval needs a positive lambda_max estimate, got {lmax}")
    logger.info("Chebyshev smoother: lambda_max(B A) ~ %.4f, %d steps", lmax, steps)
    return ChebyshevSmoother(precondition=precondition, lower=0.1 * lmax, upper=1.1 * lmax, steps=steps)

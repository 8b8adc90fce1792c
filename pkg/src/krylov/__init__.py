"""Preconditioned conjugate gradients and spectral estimates."""

from src.krylov.lanczos import (
    ConditionEstimate,
    estimate_condition,
    estimate_extreme_eigenvalues,
    lanczos_tridiagonal,
    ritz_values,
)
from src.krylov.pcg import CGBreakdown, SolveReport, as_callable, check_symmetric, pcg

__all__ = [
    "CGBreakdown",
    "ConditionEstimate",
    "SolveReport",
    "as_callable",
    "check_symmetric",
    "estimate_condition",
    "estimate_extreme_eigenvalues",
    "lanczos_tridiagonal",
    "pcg",
    "ritz_values",
]

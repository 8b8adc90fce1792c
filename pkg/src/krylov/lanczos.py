"""Extreme-eigenvalue estimates from the scalar recurrences of conjugate gradients."""

from __future__ import annotations

import logging
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal

logger = logging.getLogger(__name__)

MIN_CONFIDENT_ITERATIONS = 5


class ConditionEstimate(NamedTuple):
    kappa: float
    lambda_min: float
    lambda_max: float
    low_confidence: bool


def lanczos_tridiagonal(alphas: Sequence[float], betas: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the Lanczos matrix implied by CG step lengths.

    ``alphas[j]`` is the j-th step length and ``betas[j]`` the coefficient used to
    build search direction j+1; only the first ``len(alphas) - 1`` betas enter.
    """
    a = np.asarray(alphas, dtype=float)
    b = np.asarray(betas, dtype=float)[: max(len(a) - 1, 0)]
    if a.size == 0:
        return np.zeros(0), np.zeros(0)
    diag = 1.0 / a
    diag[1:] += b / a[:-1]
    off = np.sqrt(b) / a[:-1]
    return diag, off


def ritz_values(alphas: Sequence[float], betas: Sequence[float]) -> np.ndarray:
    diag, off = lanczos_tridiagonal(alphas, betas)
    if diag.size == 0:
        return diag
    if diag.size == 1:
        return diag.copy()
    return eigvalsh_tridiagonal(diag, off)


def condition_from_recurrences(alphas: Sequence[float], betas: Sequence[float]) -> ConditionEstimate:
    theta = ritz_values(alphas, betas)
    if theta.size == 0:
        return ConditionEstimate(float("nan"), float("nan"), float("nan"), True)
    lmin, lmax = float(theta[0]), float(theta[-1])
    kappa = lmax / lmin if lmin > 0 else float("inf")
    return ConditionEstimate(
        kappa=max(kappa, 1.0),
        lambda_min=lmin,
        lambda_max=lmax,
        low_confidence=len(theta) < MIN_CONFIDENT_ITERATIONS,
    )


def estimate_condition(report) -> ConditionEstimate:
    """kappa = lambda_max / lambda_min of the preconditioned operator, from a finished solve."""
    est = condition_from_recurrences(report.alphas, report.betas)
    if est.low_confidence:
        logger.warning(
            "Condition estimate from only %d CG iterations is low-confidence", len(report.alphas)
        )
    return est


def estimate_extreme_eigenvalues(
    A,
    M=None,
    steps: int = 15,
    seed: int = 0,
    free: np.ndarray | None = None,
) -> tuple[float, float]:
    """(lambda_min, lambda_max) of M A from ``steps`` CG iterations on a seeded random rhs.

    ``free`` masks the unconstrained DOFs; the start vector vanishes elsewhere.
    """
    from src.krylov.pcg import operator_size, pcg

    n = operator_size(A)
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(n)
    if free is not None:
        b[~np.asarray(free, dtype=bool)] = 0.0
    _, report = pcg(A, b, M=M, rtol=1e-14, maxit=steps, check_symmetry=False, warn=False)
    return report.lambda_min, report.lambda_max

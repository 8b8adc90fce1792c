from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.sparse as sp

from src.krylov.lanczos import condition_from_recurrences

logger = logging.getLogger(__name__)

SYMMETRY_RTOL = 1e-10
SYMMETRY_PAIRS = 5
DRIFT_FACTOR = 10.0


class CGBreakdown(RuntimeError):
    """Conjugate gradients met a non-positive curvature or preconditioned inner product."""


@dataclass
class SolveReport:
    iterations: int = 0
    converged: bool = False
    residual_history: list[float] = field(default_factory=list)  # ||r_k|| / ||r_0||
    preconditioned_history: list[float] = field(default_factory=list)  # sqrt(r_k^T M r_k)
    alphas: list[float] = field(default_factory=list)
    betas: list[float] = field(default_factory=list)
    lambda_min: float = float("nan")
    lambda_max: float = float("nan")
    kappa_est: float = float("nan")
    low_confidence: bool = True
    final_relative_residual: float = float("nan")  # ||b - A x|| / ||r_0|| recomputed at exit
    residual_drift: bool = False
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def operator_size(A) -> int:
    if hasattr(A, "shape"):
        return int(A.shape[0])
    raise ValueError(f"Cannot infer the size of operator {type(A).__name__}")


def as_callable(op) -> Callable[[np.ndarray], np.ndarray]:
    """Matrix-vector product of a sparse/dense matrix, LinearOperator, preconditioner or plain callable."""
    if op is None:
        return lambda x: x.copy()
    if sp.issparse(op) or isinstance(op, np.ndarray):
        return lambda x: op @ x
    if hasattr(op, "matvec"):
        return op.matvec
    if callable(op):
        return op
    raise ValueError(f"Unsupported operator type {type(op).__name__}")


def check_symmetric(apply: Callable[[np.ndarray], np.ndarray], n: int, pairs: int = SYMMETRY_PAIRS,
                    rtol: float = SYMMETRY_RTOL, seed: int = 12345, name: str = "operator") -> float:
    """Largest relative defect |<Ax,y> - <x,Ay>| over random pairs; raises ValueError beyond ``rtol``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        x = rng.standard_normal(n)
        y = rng.standard_normal(n)
        ax, ay = apply(x), apply(y)
        scale = max(np.linalg.norm(ax) * np.linalg.norm(y), np.finfo(float).tiny)
        worst = max(worst, abs(float(ax @ y - x @ ay)) / scale)
    if worst > rtol:
        raise ValueError(f"{name} is not symmetric: relative defect {worst:.3e} > {rtol:.1e}")
    return worst


def pcg(
    A,
    b: np.ndarray,
    M=None,
    rtol: float = 1e-12,
    maxit: int = 500,
    x0: np.ndarray | None = None,
    check_symmetry: bool = True,
    warn: bool = True,
    check_true_residual: bool = True,
) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned CG stopping on ||r_k|| / ||r_0|| <= rtol.

    r_k is the recursively updated residual r_{k-1} - alpha A p. At exit the true
    residual b - A x is recomputed into ``final_relative_residual``; when
    ``check_true_residual`` is set and a converged solve finds it above
    ``DRIFT_FACTOR * rtol``, ``residual_drift`` is set and a warning logged.

    Step lengths and direction coefficients are kept so the extreme eigenvalues
    of the preconditioned operator can be read off the Lanczos matrix.
    """
    apply_A = as_callable(A)
    apply_M = as_callable(M)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if check_symmetry:
        check_symmetric(apply_A, n, name="A")

    t0 = time.perf_counter()
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float, copy=True)
    r = b - apply_A(x) if x0 is not None else b.copy()
    r0 = float(np.linalg.norm(r))
    report = SolveReport()
    report.residual_history.append(1.0 if r0 > 0 else 0.0)
    if r0 == 0.0:
        report.converged = True
        report.final_relative_residual = 0.0
        report.solve_seconds = time.perf_counter() - t0
        return x, report

    z = apply_M(r)
    rho = float(r @ z)
    if rho <= 0:
        raise CGBreakdown(f"Preconditioner is not positive definite: r^T M r = {rho:.3e}")
    report.preconditioned_history.append(np.sqrt(rho))
    p = z.copy()

    for it in range(1, maxit + 1):
        q = apply_A(p)
        curv = float(p @ q)
        if curv <= 0:
            raise CGBreakdown(f"Operator is not positive definite: p^T A p = {curv:.3e} at iteration {it}")
        alpha = rho / curv
        x += alpha * p
        r -= alpha * q
        report.alphas.append(alpha)
        report.iterations = it
        rel = float(np.linalg.norm(r)) / r0
        report.residual_history.append(rel)
        if rel <= rtol or rel == 0.0:
            report.converged = True
            break
        z = apply_M(r)
        rho_new = float(r @ z)
        if rho_new <= 0:
            raise CGBreakdown(f"Preconditioner is not positive definite: r^T M r = {rho_new:.3e} at iteration {it}")
        report.preconditioned_history.append(np.sqrt(rho_new))
        beta = rho_new / rho
        report.betas.append(beta)
        p = z + beta * p
        rho = rho_new

    report.solve_seconds = time.perf_counter() - t0
    true_r = b - apply_A(x)
    report.final_relative_residual = float(np.linalg.norm(true_r)) / r0
    if check_true_residual and report.converged and report.final_relative_residual > DRIFT_FACTOR * rtol:
        report.residual_drift = True
        logger.warning(
            "PCG recursive residual %.3e drifted from the true residual %.3e",
            report.residual_history[-1], report.final_relative_residual,
        )
    est = condition_from_recurrences(report.alphas, report.betas)
    report.lambda_min = est.lambda_min
    report.lambda_max = est.lambda_max
    report.kappa_est = est.kappa
    report.low_confidence = est.low_confidence
    if warn and not report.converged:
        logger.warning(
            "PCG did not converge in %d iterations (relative residual %.3e, rtol %.1e)",
            maxit, report.residual_history[-1], rtol,
        )
    return x, report

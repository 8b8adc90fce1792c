"""Geometric multigrid with patch or Chebyshev smoothing."""

from src.multigrid.q1 import coarsening_levels, q1_multigrid_solver
from src.multigrid.smoothers import (
    ChebyshevSmoother,
    PatchSmoother,
    build_chebyshev_smoother,
    estimate_smoother_scaling,
)
from src.multigrid.transfer import build_prolongation, child_transfer_matrices
from src.multigrid.twogrid import TwoGridPreconditioner, build_two_grid
from src.multigrid.vcycle import (
    MgLevel,
    MgPreconditioner,
    NestednessError,
    build_multigrid,
    check_galerkin,
    v_cycle,
)

__all__ = [
    "ChebyshevSmoother",
    "MgLevel",
    "MgPreconditioner",
    "NestednessError",
    "PatchSmoother",
    "TwoGridPreconditioner",
    "build_chebyshev_smoother",
    "build_multigrid",
    "build_prolongation",
    "build_two_grid",
    "check_galerkin",
    "child_transfer_matrices",
    "coarsening_levels",
    "estimate_smoother_scaling",
    "q1_multigrid_solver",
    "v_cycle",
]

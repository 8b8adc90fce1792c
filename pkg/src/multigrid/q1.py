"""Q_1 multigrid as the coarse solver of the two-level Schwarz preconditioner."""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np

from src.assembly.forms import ProblemSpec
from src.mesh.hierarchy import MeshHierarchy
from src.mesh.structured import StructuredMesh, build_mesh

logger = logging.getLogger(__name__)

MIN_COARSE_CELLS = 2


def coarsening_levels(mesh: StructuredMesh, min_cells: int = MIN_COARSE_CELLS) -> MeshHierarchy:
    """Halve every axis while all counts stay even and at least ``min_cells``; coarsest first."""
    levels = [mesh]
    counts = mesh.cells_per_axis
    while all(n % 2 == 0 and n // 2 >= min_cells for n in counts):
        counts = tuple(n // 2 for n in counts)
        levels.append(build_mesh(mesh.dim, counts, (mesh.lower, mesh.upper)))
    return MeshHierarchy(levels=tuple(reversed(levels)))


def q1_multigrid_solver(
    mesh: StructuredMesh,
    spec: ProblemSpec,
    columns: np.ndarray,
    hierarchy: MeshHierarchy | None = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """One Chebyshev-Jacobi V(1,1) cycle on Q_1, acting on the retained coarse dofs ``columns``.

    The compressed vector is embedded into the full Q_1 space (Dirichlet dofs
    carry identity rows there), cycled, and compressed again.
    """
    from src.multigrid.vcycle import build_multigrid

    if hierarchy is None or hierarchy.finest != mesh:
        hierarchy = coarsening_levels(mesh)
    mg = build_multigrid(hierarchy, "Q", 1, spec, smoother="chebyshev")
    n = mg.shape[0]
    cols = np.asarray(columns, dtype=np.int64)
    logger.info("Q1 multigrid coarse solver: %d levels, %d of %d dofs retained", len(mg.levels), len(cols), n)

    def solve(r0: np.ndarray) -> np.ndarray:
        full = np.zeros(n)
        full[cols] = r0
        return mg.apply(full)[cols]

    return solve

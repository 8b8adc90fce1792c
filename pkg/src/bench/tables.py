"""Exact integer tables: global DOF counts and vertex-patch sizes."""

from __future__ import annotations

import itertools
import logging
from math import comb, prod
from typing import Iterable, Sequence

import pandas as pd

from src.assembly.dofmap import build_dofmap
from src.bench.problems import get_preset
from src.fe.basis import build_basis
from src.mesh.hierarchy import refine_uniform
from src.schwarz.patches import patch_dof_count

logger = logging.getLogger(__name__)

DOF_COLUMNS = ("problem", "family", "degree", "mesh", "dofs")
PATCHSIZE_COLUMNS = ("r", "Pr", "Sr", "Qr")


def entity_count(cells_per_axis: Sequence[int], d: int) -> int:
    """Number of d-dimensional entities of a box grid."""
    n = list(cells_per_axis)
    total = 0
    for free in itertools.combinations(range(len(n)), d):
        total += prod(n[a] if a in free else n[a] + 1 for a in range(len(n)))
    return total


def interior_dofs_closed_form(family: str, k: int, d: int) -> int:
    """DOFs on the interior of one d-dimensional entity: (k-1)^d for Q_k, dim P_{k-2d} for S_k."""
    if d == 0:
        return 1
    if family == "Q":
        return max(k - 1, 0) ** d
    if family == "S":
        top = k - 2 * d
        return comb(top + d, d) if top >= 0 else 0
    raise ValueError(f"No closed form for family '{family}'")


def dof_count_closed_form(family: str, k: int, cells_per_axis: Sequence[int], value_dim: int = 1) -> int:
    dim = len(cells_per_axis)
    scalar = sum(entity_count(cells_per_axis, d) * interior_dofs_closed_form(family, k, d) for d in range(dim + 1))
    return scalar * value_dim


def emit_dof_table(
    problems: Iterable[str],
    families: Iterable[str],
    degrees: Iterable[int],
    refine: int,
    levels: Sequence[int] | None = None,
    base_mesh: Sequence[int] | None = None,
) -> pd.DataFrame:
    """Global DOF count per (problem, family, degree, mesh), checked against the entity-count formula."""
    records = []
    families, degrees = list(families), list(degrees)
    for problem in problems:
        preset = get_preset(problem)
        vd = preset.dim if preset.kind == "elasticity" else 1
        hierarchy = refine_uniform(preset.base(base_mesh), refine)
        for family, k in itertools.product(families, degrees):
            basis = build_basis(family, k, preset.dim)
            for lv in levels if levels is not None else range(refine + 1):
                mesh = hierarchy[lv]
                n = build_dofmap(mesh, basis, vd).ndofs
                closed = dof_count_closed_form(family, k, mesh.cells_per_axis, vd)
                if n != closed:
                    raise RuntimeError(
                        f"DOF count mismatch for {problem} {family}_{k} on {mesh.descriptor}: {n} vs closed form {closed}"
                    )
                records.append({"problem": problem, "family": family, "degree": k, "mesh": mesh.descriptor, "dofs": n})
    logger.info("DOF table: %d rows", len(records))
    return pd.DataFrame.from_records(records, columns=list(DOF_COLUMNS))


def emit_patchsize_table(dim: int, r_max: int = 8) -> pd.DataFrame:
    """Interior DOFs of a vertex patch for P (triangles / tetrahedra), S and Q, degrees 1..r_max."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if r_max < 1:
        raise ValueError(f"r_max must be >= 1, got {r_max}")
    records = [
        {
            "r": r,
            "Pr": patch_dof_count("P", r, dim),
            "Sr": patch_dof_count("S", r, dim),
            "Qr": patch_dof_count("Q", r, dim),
        }
        for r in range(1, r_max + 1)
    ]
    return pd.DataFrame.from_records(records, columns=list(PATCHSIZE_COLUMNS))

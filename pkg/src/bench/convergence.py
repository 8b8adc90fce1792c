"""L2 convergence study on the manufactured Poisson problems."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import pandas as pd
from scipy.sparse.linalg import splu
from tqdm import tqdm

from src.assembly.boundary import apply_dirichlet
from src.assembly.dofmap import build_dofmap
from src.assembly.forms import assemble_operator
from src.assembly.loads import assemble_rhs, interpolate, l2_error
from src.bench.problems import get_preset, manufactured_for, problem_spec
from src.fe.basis import build_basis
from src.mesh.hierarchy import refine_uniform

logger = logging.getLogger(__name__)

CONVERGENCE_COLUMNS = ("level", "mesh", "h", "dofs", "l2_error", "observed_order", "interp_error")


def observed_orders(h: pd.Series, err: pd.Series) -> pd.Series:
    """log(e_coarse / e_fine) / log(h_coarse / h_fine) between consecutive rows; NaN on the first."""
    return np.log(err.shift(1) / err) / np.log(h.shift(1) / h)


def convergence_study(
    problem: str,
    family: str,
    k: int,
    refine: int,
    levels: Sequence[int] | None = None,
    base_mesh: Sequence[int] | None = None,
    progress: bool = False,
) -> pd.DataFrame:
    """Direct solves on successive refinements; one row per level with error and observed order."""
    preset = get_preset(problem)
    spec = problem_spec(preset)
    sol = manufactured_for(spec)
    if sol is None:
        raise ValueError(f"Problem '{problem}' has no manufactured solution")
    hierarchy = refine_uniform(preset.base(base_mesh), refine)
    basis = build_basis(family, k, preset.dim)
    chosen = list(levels) if levels is not None else list(range(refine + 1))
    records = []
    for lv in tqdm(chosen, desc=f"converge {family}_{k}", leave=False, disable=not progress):
        mesh = hierarchy[lv]
        dofmap = build_dofmap(mesh, basis)
        A = assemble_operator(mesh, basis, dofmap, spec)
        b = assemble_rhs(mesh, basis, dofmap, spec)
        apply_dirichlet(A, b, dofmap, spec.dirichlet)
        u = splu(A.tocsc()).solve(b)
        records.append({
            "level": lv,
            "mesh": mesh.descriptor,
            "h": float(mesh.spacing.max()),
            "dofs": dofmap.ndofs,
            "l2_error": l2_error(mesh, dofmap, u, sol.exact),
            "interp_error": l2_error(mesh, dofmap, interpolate(mesh, dofmap, sol.exact), sol.exact),
        })
        logger.info("%s_%d %s: L2 error %.4e", family, k, mesh.descriptor, records[-1]["l2_error"])
    df = pd.DataFrame.from_records(records)
    df["observed_order"] = observed_orders(df["h"], df["l2_error"])
    return df[list(CONVERGENCE_COLUMNS)]

"""One benchmark experiment: assemble, precondition and solve every reported refinement level."""

from __future__ import annotations

import logging
import math
import time
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from tqdm import tqdm

from src.assembly.boundary import apply_dirichlet, constrained_mask
from src.assembly.dofmap import build_dofmap
from src.assembly.forms import ProblemSpec, assemble_operator
from src.assembly.loads import assemble_rhs, l2_error
from src.bench.problems import PRESETS, get_preset, manufactured_for, problem_spec
from src.fe.basis import build_basis
from src.krylov.pcg import SolveReport, pcg
from src.mesh.hierarchy import MeshHierarchy, refine_uniform
from src.multigrid.twogrid import build_two_grid
from src.multigrid.vcycle import assemble_level, build_multigrid
from src.schwarz.asm import build_asm

logger = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "problem", "family", "degree", "mesh", "dofs", "iterations", "converged",
    "kappa_est", "lambda_min", "lambda_max", "l2_error", "setup_seconds", "solve_seconds",
)
PRECONDITIONERS = ("none", "patch", "asm2", "mg")


class ExperimentConfig(BaseModel):
    """Validated form of one experiment, flattened from the YAML sections."""

    model_config = ConfigDict(extra="forbid")

    problem: Literal["poisson2d", "poisson3d", "elasticity2d"] = "poisson2d"
    family: Literal["S", "Q"] = "S"
    degree: int = Field(2, ge=1, le=6)
    base_mesh: tuple[int, ...] | None = None
    refine: int = Field(2, ge=0)
    report_levels: tuple[int, ...] | None = None
    preconditioner: Literal["none", "patch", "asm2", "mg"] = "asm2"
    cycle: Literal["multiplicative", "additive"] = "multiplicative"
    smoothing_steps: int = Field(2, ge=1)
    coarse: Literal["direct", "q1mg"] = "direct"
    smoother: Literal["patch", "chebyshev"] = "patch"
    omega: float | Literal["auto"] = "auto"
    rtol: float = Field(1e-12, gt=0.0, lt=1.0)
    maxit: int = Field(500, ge=1)
    forcing: str | None = None
    dirichlet: str | tuple[str, ...] | None = None
    E: float = Field(1.0, gt=0.0)
    nu: float = Field(0.3, gt=-1.0, lt=0.5)
    gravity: float = 1.0
    timings: bool = True

    @field_validator("base_mesh", mode="before")
    @classmethod
    def _parse_mesh(cls, v: Any) -> Any:
        if isinstance(v, str):
            return tuple(int(p) for p in v.replace("x", ",").split(",") if p.strip())
        if isinstance(v, int):
            return (v,)
        return v

    @field_validator("omega", mode="before")
    @classmethod
    def _parse_omega(cls, v: Any) -> Any:
        if v is None or (isinstance(v, str) and v.strip().lower() == "auto"):
            return "auto"
        return v

    @model_validator(mode="after")
    def _check_combination(self) -> "ExperimentConfig":
        dim = PRESETS[self.problem].dim
        if self.base_mesh is not None:
            if len(self.base_mesh) == 1:
                self.base_mesh = self.base_mesh * dim
            if len(self.base_mesh) != dim:
                raise ValueError(f"{self.problem} is {dim}D, base_mesh {list(self.base_mesh)} is not")
            if any(n < 1 for n in self.base_mesh):
                raise ValueError(f"base_mesh counts must be >= 1, got {list(self.base_mesh)}")
        if self.report_levels is not None:
            bad = [lv for lv in self.report_levels if not 0 <= lv <= self.refine]
            if bad:
                raise ValueError(f"report_levels {bad} outside 0..{self.refine}")
        if isinstance(self.omega, float) and self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        return self

    @classmethod
    def from_mapping(cls, cfg: dict[str, Any]) -> "ExperimentConfig":
        """Merge the experiment/solver/material/report sections of a config mapping."""
        flat: dict[str, Any] = {}
        flat.update(cfg.get("experiment", {}) or {})
        solver = cfg.get("solver", {}) or {}
        flat.update({k: solver[k] for k in ("rtol", "maxit") if k in solver})
        flat.update(cfg.get("material", {}) or {})
        report = cfg.get("report", {}) or {}
        if "timings" in report:
            flat["timings"] = report["timings"]
        return cls.model_validate(flat)

    @property
    def levels(self) -> tuple[int, ...]:
        return self.report_levels if self.report_levels is not None else tuple(range(self.refine + 1))

    @property
    def label(self) -> str:
        return f"{self.problem} {self.family}_{self.degree} pc={self.preconditioner}"


class ResultRow(BaseModel):
    """One (experiment x refinement level) outcome; the first columns are the CSV schema."""

    problem: str
    family: str
    degree: int
    mesh: str
    dofs: int
    iterations: int
    converged: bool
    kappa_est: float
    lambda_min: float
    lambda_max: float
    l2_error: float | None = None
    setup_seconds: float | None = None
    solve_seconds: float | None = None
    level: int = 0
    preconditioner: str = "none"
    report: dict[str, Any] = Field(default_factory=dict)

    def csv_record(self) -> dict[str, Any]:
        return {c: getattr(self, c) for c in RESULT_COLUMNS}


def build_preconditioner(cfg: ExperimentConfig, hierarchy: MeshHierarchy, level: int, spec: ProblemSpec,
                         dofmap, A, progress: bool = False):
    """The preconditioner named in ``cfg`` for the operator on ``hierarchy[level]``."""
    if cfg.preconditioner == "none":
        return None
    sub = MeshHierarchy(levels=hierarchy.levels[: level + 1])
    mesh = sub.finest
    if cfg.preconditioner in ("patch", "asm2"):
        if cfg.preconditioner == "asm2" and cfg.cycle == "multiplicative":
            return build_two_grid(A, mesh, dofmap, spec, coarse_solver=cfg.coarse, steps=cfg.smoothing_steps,
                                  hierarchy=sub)
        omega = 1.0 if cfg.omega == "auto" else float(cfg.omega)
        mode = "patch" if cfg.preconditioner == "patch" else "two-level"
        return build_asm(A, mesh, dofmap, spec, mode=mode, coarse_solver=cfg.coarse, omega=omega, hierarchy=sub)
    coarser = [assemble_level(m, cfg.family, cfg.degree, spec) for m in sub.levels[:-1]]
    finest = (dofmap, A, ~constrained_mask(dofmap, spec.dirichlet))
    return build_multigrid(sub, cfg.family, cfg.degree, spec, smoother=cfg.smoother, omega=cfg.omega,
                           levels=[*coarser, finest], progress=progress)


def solve_level(cfg: ExperimentConfig, hierarchy: MeshHierarchy, level: int, progress: bool = False) -> ResultRow:
    preset = get_preset(cfg.problem)
    spec = problem_spec(preset, forcing=cfg.forcing, dirichlet=cfg.dirichlet, E=cfg.E, nu=cfg.nu, gravity=cfg.gravity)
    mesh = hierarchy[level]
    basis = build_basis(cfg.family, cfg.degree, mesh.dim)
    dofmap = build_dofmap(mesh, basis, spec.value_dim(mesh.dim))
    A = assemble_operator(mesh, basis, dofmap, spec)
    b = assemble_rhs(mesh, basis, dofmap, spec)
    apply_dirichlet(A, b, dofmap, spec.dirichlet)

    t0 = time.perf_counter()
    M = build_preconditioner(cfg, hierarchy, level, spec, dofmap, A, progress=progress)
    setup = time.perf_counter() - t0
    x, report = pcg(A, b, M=M, rtol=cfg.rtol, maxit=cfg.maxit)
    report.setup_seconds = setup

    sol = manufactured_for(spec)
    err = None
    if sol is not None and spec.dirichlet == "all":
        err = l2_error(mesh, dofmap, x, sol.exact)
    logger.info(
        "%s %s: dofs=%d its=%d kappa=%.3f%s", cfg.label, mesh.descriptor, dofmap.ndofs, report.iterations,
        report.kappa_est, "" if report.converged else " (NOT converged)",
    )
    return make_row(cfg, level, mesh.descriptor, dofmap.ndofs, report, err)


def make_row(cfg: ExperimentConfig, level: int, mesh: str, dofs: int, report: SolveReport,
             err: float | None) -> ResultRow:
    timed = cfg.timings
    detail = report.to_dict()
    if not timed:
        detail["setup_seconds"] = None
        detail["solve_seconds"] = None
    return ResultRow(
        problem=cfg.problem,
        family=cfg.family,
        degree=cfg.degree,
        mesh=mesh,
        dofs=dofs,
        iterations=report.iterations,
        converged=report.converged,
        kappa_est=report.kappa_est,
        lambda_min=report.lambda_min,
        lambda_max=report.lambda_max,
        l2_error=err,
        setup_seconds=report.setup_seconds if timed else None,
        solve_seconds=report.solve_seconds if timed else None,
        level=level,
        preconditioner=cfg.preconditioner,
        report=_finite(detail),
    )


def _finite(value: Any) -> Any:
    """NaN/inf -> None so the JSON companion stays standard JSON."""
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return None
    return value


def run_experiment(cfg: ExperimentConfig, progress: bool = False) -> list[ResultRow]:
    """Rows for every reported level of one experiment, coarsest first."""
    preset = get_preset(cfg.problem)
    hierarchy = refine_uniform(preset.base(cfg.base_mesh), cfg.refine)
    levels = cfg.levels
    it = tqdm(levels, desc=cfg.label, leave=False) if progress else levels
    return [solve_level(cfg, hierarchy, lv) for lv in it]

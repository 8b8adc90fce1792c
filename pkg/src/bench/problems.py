"""Benchmark problem presets: geometry, boundary selector and forcing of each experiment family."""

from __future__ import annotations

from dataclasses import dataclass

from src.assembly.forms import ProblemSpec, lame_from_young
from src.assembly.loads import MANUFACTURED, ManufacturedSolution
from src.mesh.structured import StructuredMesh, build_mesh


@dataclass(frozen=True)
class ProblemPreset:
    name: str
    dim: int
    kind: str
    base_mesh: tuple[int, ...]
    box: tuple[tuple[float, ...], tuple[float, ...]]
    dirichlet: str | tuple[str, ...]
    forcing: str

    def base(self, cells_per_axis: tuple[int, ...] | list[int] | None = None) -> StructuredMesh:
        return build_mesh(self.dim, cells_per_axis or self.base_mesh, self.box)


PRESETS: dict[str, ProblemPreset] = {
    "poisson2d": ProblemPreset(
        name="poisson2d", dim=2, kind="poisson", base_mesh=(8, 8),
        box=((0.0, 0.0), (1.0, 1.0)), dirichlet="all", forcing="exp_sin_2d",
    ),
    "poisson3d": ProblemPreset(
        name="poisson3d", dim=3, kind="poisson", base_mesh=(4, 4, 4),
        box=((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)), dirichlet="all", forcing="exp_sin_3d",
    ),
    # cantilever clamped at x = 0 under its own weight
    "elasticity2d": ProblemPreset(
        name="elasticity2d", dim=2, kind="elasticity", base_mesh=(125, 5),
        box=((0.0, 0.0), (25.0, 1.0)), dirichlet=("xmin",), forcing="gravity",
    ),
}


def get_preset(name: str) -> ProblemPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"Unknown problem '{name}', expected one of {sorted(PRESETS)}") from None


def problem_spec(
    preset: ProblemPreset,
    forcing: str | None = None,
    dirichlet: str | list[str] | None = None,
    E: float = 1.0,
    nu: float = 0.3,
    gravity: float = 1.0,
) -> ProblemSpec:
    """ProblemSpec of a preset with optional forcing / boundary / material overrides."""
    forcing = forcing or preset.forcing
    dirichlet = preset.dirichlet if dirichlet is None else dirichlet
    if preset.kind == "elasticity":
        lam, mu = lame_from_young(E, nu, plane_stress=preset.dim == 2)
        return ProblemSpec(kind="elasticity", forcing=forcing, dirichlet=dirichlet, lam=lam, mu=mu,
                           forcing_value=gravity)
    return ProblemSpec(kind="poisson", forcing=forcing, dirichlet=dirichlet)


def manufactured_for(spec: ProblemSpec) -> ManufacturedSolution | None:
    """The exact solution behind the forcing, when the problem has one."""
    return MANUFACTURED.get(spec.forcing)

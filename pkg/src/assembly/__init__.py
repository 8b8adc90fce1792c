"""Global DOF numbering, sparse assembly and boundary conditions."""

from src.assembly.boundary import apply_dirichlet, constrained_dofs, constrained_mask
from src.assembly.dofmap import DofMap, build_dofmap
from src.assembly.forms import ProblemSpec, assemble_operator, lame_from_young, local_stiffness
from src.assembly.loads import (
    MANUFACTURED,
    assemble_load,
    assemble_rhs,
    evaluate,
    get_manufactured,
    interpolate,
    l2_error,
)

__all__ = [
    "MANUFACTURED",
    "DofMap",
    "ProblemSpec",
    "apply_dirichlet",
    "assemble_load",
    "assemble_operator",
    "assemble_rhs",
    "build_dofmap",
    "constrained_dofs",
    "constrained_mask",
    "evaluate",
    "get_manufactured",
    "interpolate",
    "l2_error",
    "lame_from_young",
    "local_stiffness",
]

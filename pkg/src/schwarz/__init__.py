"""Vertex-patch additive Schwarz preconditioners."""

from src.schwarz.asm import AsmPreconditioner, apply_asm, build_asm
from src.schwarz.coarse import CoarseSpace, CoarseSpaceMismatchError, build_coarse_space
from src.schwarz.patches import (
    PatchFactorizationError,
    PatchSet,
    VertexPatch,
    build_patches,
    patch_dof_count,
)

__all__ = [
    "AsmPreconditioner",
    "CoarseSpace",
    "CoarseSpaceMismatchError",
    "PatchFactorizationError",
    "PatchSet",
    "VertexPatch",
    "apply_asm",
    "build_asm",
    "build_coarse_space",
    "build_patches",
    "patch_dof_count",
]

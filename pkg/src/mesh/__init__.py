"""Structured quad/hex meshes and refinement hierarchies."""

from src.mesh.hierarchy import MeshHierarchy, refine_uniform
from src.mesh.structured import (
    FACET_NAMES,
    EntityClass,
    StructuredMesh,
    build_mesh,
    dirichlet_vertex_mask,
    interior_vertices,
    resolve_facets,
)

__all__ = [
    "FACET_NAMES",
    "EntityClass",
    "MeshHierarchy",
    "StructuredMesh",
    "build_mesh",
    "dirichlet_vertex_mask",
    "interior_vertices",
    "refine_uniform",
    "resolve_facets",
]

"""Structured meshes of axis-aligned boxes with full entity topology.

Entities of a ``dim``-dimensional tensor grid are grouped into classes by the
set of axes they extend along (``free_axes``). A vertex has no free axis, an
x-edge has ``(0,)``, a 3D face normal to z has ``(0, 1)`` and a cell has every
axis. Inside one class, entities live on a grid whose extent is ``n_a`` along
free axes and ``n_a + 1`` along the others; ids are lexicographic with axis 0
fastest. Classes are ordered by dimension, then by ``itertools.combinations``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

FACET_NAMES = ("xmin", "xmax", "ymin", "ymax", "zmin", "zmax")

Facet = tuple[int, int]  # (axis, side) with side 0 = lower, 1 = upper


@dataclass(frozen=True)
class EntityClass:
    free_axes: tuple[int, ...]
    shape: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.free_axes)

    @property
    def count(self) -> int:
        return int(np.prod(self.shape))

    def ravel(self, grid_index: Sequence[np.ndarray]) -> np.ndarray:
        return np.ravel_multi_index(tuple(grid_index), self.shape, order="F")

    def unravel(self, ids: np.ndarray) -> tuple[np.ndarray, ...]:
        return np.unravel_index(ids, self.shape, order="F")


@dataclass(frozen=True)
class StructuredMesh:
    dim: int
    cells_per_axis: tuple[int, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    # ─── sizes ────────────────────────────────────────────────────────
    @property
    def vertex_shape(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.cells_per_axis)

    @property
    def num_vertices(self) -> int:
        return int(np.prod(self.vertex_shape))

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.cells_per_axis))

    @property
    def spacing(self) -> np.ndarray:
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        return (hi - lo) / np.asarray(self.cells_per_axis, dtype=float)

    @property
    def descriptor(self) -> str:
        return "x".join(str(n) for n in self.cells_per_axis)

    # ─── entity classes ───────────────────────────────────────────────
    @cached_property
    def entity_classes(self) -> tuple[EntityClass, ...]:
        out: list[EntityClass] = []
        for d in range(self.dim + 1):
            for free in itertools.combinations(range(self.dim), d):
                shape = tuple(
                    n if a in free else n + 1 for a, n in enumerate(self.cells_per_axis)
                )
                out.append(EntityClass(free_axes=free, shape=shape))
        return tuple(out)

    def classes_of_dim(self, d: int) -> list[int]:
        return [i for i, c in enumerate(self.entity_classes) if c.dim == d]

    def class_index(self, free_axes: tuple[int, ...]) -> int:
        for i, c in enumerate(self.entity_classes):
            if c.free_axes == free_axes:
                return i
        raise ValueError(f"No entity class with free axes {free_axes}")

    def num_entities(self, d: int) -> int:
        return sum(self.entity_classes[i].count for i in self.classes_of_dim(d))

    @property
    def num_edges(self) -> int:
        return self.num_entities(1)

    @property
    def num_faces(self) -> int:
        return self.num_entities(2)

    # ─── geometry ─────────────────────────────────────────────────────
    def grid_coordinates(self, grid_index: Sequence[np.ndarray]) -> np.ndarray:
        """Coordinates of vertex-grid indices (exact dyadic fractions of the box)."""
        cols = []
        for a in range(self.dim):
            i = np.asarray(grid_index[a], dtype=float)
            n = float(self.cells_per_axis[a])
            cols.append(self.lower[a] + (self.upper[a] - self.lower[a]) * (i / n))
        return np.stack(cols, axis=-1)

    @cached_property
    def vertex_coordinates(self) -> np.ndarray:
        vcls = self.entity_classes[0]
        idx = vcls.unravel(np.arange(vcls.count))
        return self.grid_coordinates(idx)

    @cached_property
    def cell_grid_index(self) -> tuple[np.ndarray, ...]:
        ccls = self.entity_classes[-1]
        return ccls.unravel(np.arange(ccls.count))

    @cached_property
    def cell_lower_corners(self) -> np.ndarray:
        return self.grid_coordinates(self.cell_grid_index)

    def reference_to_physical(self, cells: np.ndarray, ref_points: np.ndarray) -> np.ndarray:
        """Map reference points in [-1,1]^dim into the given cells, shape (cells, points, dim)."""
        x0 = self.cell_lower_corners[cells]
        half = 0.5 * self.spacing
        return x0[:, None, :] + half[None, None, :] * (ref_points[None, :, :] + 1.0)

    # ─── incidence ────────────────────────────────────────────────────
    def entity_vertices(self, class_index: int) -> np.ndarray:
        """Vertex ids of every entity in a class, shape (count, 2^d), corners lexicographic."""
        cls = self.entity_classes[class_index]
        grid = cls.unravel(np.arange(cls.count))
        vcls = self.entity_classes[0]
        corners = []
        for bits in itertools.product((0, 1), repeat=cls.dim):
            idx = [np.asarray(g).copy() for g in grid]
            for a, b in zip(cls.free_axes, reversed(bits)):
                idx[a] = idx[a] + b
            corners.append(vcls.ravel(idx))
        # product() varies the last bit fastest; reversing puts the first free axis fastest
        return np.stack(corners, axis=1)

    @property
    def cell_vertices(self) -> np.ndarray:
        return self.entity_vertices(len(self.entity_classes) - 1)

    # ─── boundary ─────────────────────────────────────────────────────
    def entities_on_facets(self, class_index: int, facets: Iterable[Facet]) -> np.ndarray:
        """Mask of class entities contained in the closure of any of the facets."""
        cls = self.entity_classes[class_index]
        grid = cls.unravel(np.arange(cls.count))
        mask = np.zeros(cls.count, dtype=bool)
        for axis, side in facets:
            if axis in cls.free_axes:
                continue
            target = 0 if side == 0 else self.cells_per_axis[axis]
            mask |= grid[axis] == target
        return mask

    def boundary_facets(self) -> tuple[Facet, ...]:
        return tuple((a, s) for a in range(self.dim) for s in (0, 1))

    def refine(self) -> "StructuredMesh":
        return StructuredMesh(
            dim=self.dim,
            cells_per_axis=tuple(2 * n for n in self.cells_per_axis),
            lower=self.lower,
            upper=self.upper,
        )


def build_mesh(
    dim: int,
    cells_per_axis: Sequence[int],
    box: tuple[Sequence[float], Sequence[float]] | None = None,
) -> StructuredMesh:
    """Build a ``dim``-dimensional box mesh; ``box`` defaults to the unit square/cube."""
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    counts = tuple(int(n) for n in cells_per_axis)
    if len(counts) != dim:
        raise ValueError(f"Expected {dim} cell counts, got {list(cells_per_axis)}")
    if any(n < 1 for n in counts):
        raise ValueError(f"cells_per_axis must be >= 1 on every axis, got {list(counts)}")
    if box is None:
        box = ((0.0,) * dim, (1.0,) * dim)
    lower = tuple(float(v) for v in box[0])
    upper = tuple(float(v) for v in box[1])
    if len(lower) != dim or len(upper) != dim:
        raise ValueError(f"Box corners must have {dim} coordinates: {box}")
    if any(hi <= lo for lo, hi in zip(lower, upper)):
        raise ValueError(f"Box must have positive extent on every axis: {box}")
    return StructuredMesh(dim=dim, cells_per_axis=counts, lower=lower, upper=upper)


def resolve_facets(selector: str | Sequence[str] | None, dim: int) -> tuple[Facet, ...]:
    """Translate ``all`` / ``none`` / ``["xmin", ...]`` into (axis, side) pairs."""
    if selector is None:
        return ()
    if isinstance(selector, str):
        key = selector.strip().lower()
        if key in ("all", "boundary", "on_boundary"):
            return tuple((a, s) for a in range(dim) for s in (0, 1))
        if key in ("none", ""):
            return ()
        selector = [p for p in key.split(",") if p.strip()]
    out: list[Facet] = []
    for name in selector:
        name = str(name).strip().lower()
        if name not in FACET_NAMES:
            raise ValueError(f"Unknown facet '{name}', expected one of {FACET_NAMES}")
        axis, side = divmod(FACET_NAMES.index(name), 2)
        if axis >= dim:
            raise ValueError(f"Facet '{name}' does not exist in {dim}D")
        if (axis, side) not in out:
            out.append((axis, side))
    return tuple(sorted(out))


def dirichlet_vertex_mask(mesh: StructuredMesh, dirichlet: str | Sequence[str] | None) -> np.ndarray:
    return mesh.entities_on_facets(0, resolve_facets(dirichlet, mesh.dim))


def interior_vertices(mesh: StructuredMesh, dirichlet: str | Sequence[str] | None) -> np.ndarray:
    """Vertex ids off the closure of the Dirichlet boundary (the patch centers)."""
    return np.flatnonzero(~dirichlet_vertex_mask(mesh, dirichlet))

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from src.mesh.structured import StructuredMesh


@dataclass(frozen=True)
class MeshHierarchy:
    """Uniformly refined levels, coarsest first; ``levels[l + 1]`` halves every cell of ``levels[l]``."""

    levels: tuple[StructuredMesh, ...]
    _parents: dict[int, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self) -> Iterator[StructuredMesh]:
        return iter(self.levels)

    def __getitem__(self, level: int) -> StructuredMesh:
        return self.levels[level]

    @property
    def finest(self) -> StructuredMesh:
        return self.levels[-1]

    @property
    def coarsest(self) -> StructuredMesh:
        return self.levels[0]

    def parent_cells(self, level: int) -> np.ndarray:
        """Coarse parent cell of every cell on ``level`` (level >= 1)."""
        if level < 1 or level >= len(self.levels):
            raise ValueError(f"parent_cells needs 1 <= level < {len(self.levels)}, got {level}")
        if level not in self._parents:
            fine = self.levels[level]
            coarse = self.levels[level - 1]
            grid = fine.cell_grid_index
            parent_idx = [np.asarray(g) // 2 for g in grid]
            self._parents[level] = coarse.entity_classes[-1].ravel(parent_idx)
        return self._parents[level]

    def child_cells(self, level: int) -> np.ndarray:
        """Children on ``level + 1`` of every cell on ``level``, shape (cells, 2^dim), child offset x fastest."""
        coarse = self.levels[level]
        fine = self.levels[level + 1]
        grid = coarse.cell_grid_index
        fcls = fine.entity_classes[-1]
        cols = []
        for bits in itertools.product((0, 1), repeat=coarse.dim):
            offs = bits[::-1]
            cols.append(fcls.ravel([2 * np.asarray(g) + o for g, o in zip(grid, offs)]))
        return np.stack(cols, axis=1)

    def coarse_vertex_in_fine(self, level: int) -> np.ndarray:
        """Fine vertex id (on ``level + 1``) of every vertex of ``level``."""
        coarse = self.levels[level]
        fine = self.levels[level + 1]
        vcls = coarse.entity_classes[0]
        grid = vcls.unravel(np.arange(vcls.count))
        return fine.entity_classes[0].ravel([2 * np.asarray(g) for g in grid])

    def classify_fine_vertices(self, level: int) -> np.ndarray:
        """For every vertex of ``level + 1``, the dimension of the coarse entity whose interior holds it.

        0 = coarse vertex, 1 = edge midpoint, 2 = face center, 3 = cell center.
        """
        fine = self.levels[level + 1]
        vcls = fine.entity_classes[0]
        grid = vcls.unravel(np.arange(vcls.count))
        return sum((np.asarray(g) % 2) for g in grid).astype(np.int64)


def refine_uniform(mesh: StructuredMesh, times: int) -> MeshHierarchy:
    if times < 0:
        raise ValueError(f"times must be >= 0, got {times}")
    levels = [mesh]
    for _ in range(times):
        levels.append(levels[-1].refine())
    return MeshHierarchy(levels=tuple(levels))

"""Global DOF numbering.

Scalar DOFs are numbered entity-class-major (vertices, then each edge class,
then faces, then cells), entity id within a class, then moment slot. Vector
fields interleave components: global = scalar * value_dim + component.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from src.fe.basis import ElementBasis
from src.fe.dofs import reference_cell
from src.mesh.structured import StructuredMesh

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DofMap:
    mesh: StructuredMesh
    basis: ElementBasis
    value_dim: int = 1

    # ─── counts ───────────────────────────────────────────────────────
    @cached_property
    def class_offsets(self) -> np.ndarray:
        """First scalar DOF of every entity class, with the scalar total appended."""
        counts = [
            cls.count * self.basis.entity_dofs[ci] for ci, cls in enumerate(self.mesh.entity_classes)
        ]
        return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    @property
    def num_scalar_dofs(self) -> int:
        return int(self.class_offsets[-1])

    @property
    def ndofs(self) -> int:
        return self.num_scalar_dofs * self.value_dim

    @property
    def local_size(self) -> int:
        return self.basis.ndofs * self.value_dim

    def entity_scalar_dofs(self, class_index: int, entities: np.ndarray) -> np.ndarray:
        """Scalar DOFs carried by the given entities of one class, shape (entities, dofs_per_entity)."""
        nd = self.basis.entity_dofs[class_index]
        base = self.class_offsets[class_index] + np.asarray(entities, dtype=np.int64) * nd
        return base[:, None] + np.arange(nd, dtype=np.int64)[None, :]

    def expand(self, scalar_dofs: np.ndarray) -> np.ndarray:
        """Scalar DOF ids -> interleaved vector DOF ids (flattened, component fastest)."""
        s = np.asarray(scalar_dofs, dtype=np.int64).reshape(-1)
        vd = self.value_dim
        return (s[:, None] * vd + np.arange(vd)[None, :]).reshape(-1)

    @property
    def vertex_dofs(self) -> np.ndarray:
        """Scalar DOF of every mesh vertex (vertex values come first)."""
        return np.arange(self.mesh.num_vertices, dtype=np.int64)

    # ─── cell maps ────────────────────────────────────────────────────
    @cached_property
    def cell_scalar_dofs(self) -> np.ndarray:
        """(cells, basis.ndofs) scalar DOFs in local functional order."""
        mesh = self.mesh
        ref = reference_cell(mesh.dim)
        cgrid = [np.asarray(g, dtype=np.int64) for g in mesh.cell_grid_index]
        cols = []
        for fn, slot in zip(self.basis.functionals, self.local_slots):
            cls = mesh.entity_classes[fn.class_index]
            rcls = ref.entity_classes[fn.class_index]
            offset = [int(o) for o in rcls.unravel(np.array(fn.entity))]
            idx = [cgrid[a] + offset[a] for a in range(mesh.dim)]
            ent = cls.ravel(idx)
            nd = self.basis.entity_dofs[fn.class_index]
            cols.append(self.class_offsets[fn.class_index] + ent * nd + slot)
        return np.stack(cols, axis=1).astype(np.int64)

    @cached_property
    def local_slots(self) -> tuple[int, ...]:
        """Position of each local functional among those of its entity."""
        seen: dict[tuple[int, int], int] = {}
        out = []
        for fn in self.basis.functionals:
            key = (fn.class_index, fn.entity)
            out.append(seen.get(key, 0))
            seen[key] = out[-1] + 1
        return tuple(out)

    @cached_property
    def cell_dofs(self) -> np.ndarray:
        """(cells, local_size) global DOFs; local = i * value_dim + component."""
        sc = self.cell_scalar_dofs
        vd = self.value_dim
        if vd == 1:
            return sc
        return (sc[:, :, None] * vd + np.arange(vd)[None, None, :]).reshape(sc.shape[0], -1)

    @cached_property
    def cell_scalar_signs(self) -> np.ndarray:
        """Orientation signs (cells, basis.ndofs) relating local functionals to the global ones.

        Global edge direction runs from the lower to the higher vertex id; odd
        Legendre moments flip when a cell traverses the edge the other way.
        """
        mesh = self.mesh
        ref = reference_cell(mesh.dim)
        cgrid = [np.asarray(g, dtype=np.int64) for g in mesh.cell_grid_index]
        vcls = mesh.entity_classes[0]
        signs = np.ones((mesh.num_cells, self.basis.ndofs))
        for i, fn in enumerate(self.basis.functionals):
            cls = mesh.entity_classes[fn.class_index]
            if cls.dim == 0 or fn.moment_degree % 2 == 0:
                continue
            if cls.dim != 1:
                # faces and cell interiors of an axis-aligned lexicographic grid share the reference orientation
                continue
            rcls = ref.entity_classes[fn.class_index]
            offset = [int(o) for o in rcls.unravel(np.array(fn.entity))]
            a = cls.free_axes[0]
            start = [cgrid[b] + offset[b] for b in range(mesh.dim)]
            stop = [s + (1 if b == a else 0) for b, s in enumerate(start)]
            v0 = vcls.ravel(start)
            v1 = vcls.ravel(stop)
            signs[:, i] = np.where(v0 < v1, 1.0, -1.0)
        return signs

    @cached_property
    def cell_signs(self) -> np.ndarray:
        s = self.cell_scalar_signs
        if self.value_dim == 1:
            return s
        return np.repeat(s, self.value_dim, axis=1)


def build_dofmap(mesh: StructuredMesh, basis: ElementBasis, value_dim: int = 1) -> DofMap:
    if basis.dim != mesh.dim:
        raise ValueError(f"Basis dimension {basis.dim} does not match mesh dimension {mesh.dim}")
    if value_dim < 1:
        raise ValueError(f"value_dim must be >= 1, got {value_dim}")
    dm = DofMap(mesh=mesh, basis=basis, value_dim=value_dim)
    logger.info(
        "DofMap %s_%d on %s mesh: %d dofs (value_dim=%d)",
        basis.family, basis.degree, mesh.descriptor, dm.ndofs, value_dim,
    )
    return dm

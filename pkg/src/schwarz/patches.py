"""Vertex patches: index sets, dense local operators and their Cholesky factors.

A patch collects every unconstrained DOF whose supporting entity has the
center vertex in its closure (the vertex itself, the incident edges and faces
and the interiors of the adjacent cells). Patches are grouped by size so the
local blocks can be gathered, factored and applied as stacked dense arrays;
blocks that are bit-identical share one factor.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from math import comb

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_solve

from src.assembly.boundary import Selector, constrained_mask
from src.assembly.dofmap import DofMap
from src.mesh.structured import interior_vertices

logger = logging.getLogger(__name__)

PATCH_SHAPES = ("quad", "hex", "tri", "tet")
_CHUNK_ENTRIES = 4_000_000


class PatchFactorizationError(RuntimeError):
    """A local patch block is not symmetric positive definite."""


# ─── closed-form patch sizes ──────────────────────────────────────────


def _dim_p(k: int, dim: int) -> int:
    return comb(k + dim, dim) if k >= 0 else 0


def patch_dof_count(family: str, k: int, dim: int, patch_shape: str | None = None) -> int:
    """Interior DOFs of one vertex patch under homogeneous Dirichlet conditions on its boundary.

    quad: 4 squares, hex: 8 cubes, tri: 6 triangles, tet: 24 tetrahedra around the vertex.
    """
    fam = str(family).upper()
    if k < 1:
        raise ValueError(f"Polynomial degree must be >= 1, got {k}")
    shape = patch_shape or {2: "tri" if fam == "P" else "quad", 3: "tet" if fam == "P" else "hex"}.get(dim)
    if shape not in PATCH_SHAPES:
        raise ValueError(f"Unsupported patch shape '{patch_shape}' for dim={dim}")
    if (shape in ("quad", "tri") and dim != 2) or (shape in ("hex", "tet") and dim != 3):
        raise ValueError(f"Patch shape '{shape}' does not live in {dim}D")
    if fam == "Q" and shape in ("quad", "hex"):
        return (2 * k - 1) ** dim
    if fam == "S" and shape == "quad":
        return 1 + 4 * (k - 1) + 4 * _dim_p(k - 4, 2)
    if fam == "S" and shape == "hex":
        return 1 + 6 * (k - 1) + 12 * _dim_p(k - 4, 2) + 8 * _dim_p(k - 6, 3)
    if fam == "P" and shape == "tri":
        # 1 vertex, 6 interior edges, 6 triangles
        return 1 + 6 * (k - 1) + 6 * _dim_p(k - 3, 2)
    if fam == "P" and shape == "tet":
        # 1 vertex, 14 edges, 36 interior faces, 24 tetrahedra
        return 1 + 14 * (k - 1) + 36 * _dim_p(k - 3, 2) + 24 * _dim_p(k - 4, 3)
    raise ValueError(f"Unsupported combination family={family}, patch shape={shape}")


# ─── index sets ───────────────────────────────────────────────────────


def patch_index_table(dofmap: DofMap, centers: np.ndarray, free: np.ndarray) -> np.ndarray:
    """(patches, max_size) global DOFs of each vertex patch, valid entries first, padded with -1."""
    mesh = dofmap.mesh
    vd = dofmap.value_dim
    vgrid = [np.asarray(g, dtype=np.int64) for g in mesh.entity_classes[0].unravel(centers)]
    cols = []
    for ci, cls in enumerate(mesh.entity_classes):
        nd = dofmap.basis.entity_dofs[ci]
        if nd == 0:
            continue
        for offs in itertools.product((-1, 0), repeat=cls.dim):
            grid = [g.copy() for g in vgrid]
            valid = np.ones(len(centers), dtype=bool)
            for a, o in zip(cls.free_axes, offs[::-1]):
                grid[a] += o
                valid &= (grid[a] >= 0) & (grid[a] < cls.shape[a])
                np.clip(grid[a], 0, cls.shape[a] - 1, out=grid[a])
            ents = cls.ravel(grid)
            sd = dofmap.entity_scalar_dofs(ci, ents)
            vdofs = (sd[:, :, None] * vd + np.arange(vd)[None, None, :]).reshape(len(centers), -1)
            vdofs[~valid] = -1
            cols.append(vdofs)
    table = np.hstack(cols)
    table[(table >= 0) & ~free[np.maximum(table, 0)]] = -1
    order = np.argsort(table < 0, axis=1, kind="stable")
    return np.take_along_axis(table, order, axis=1)


def extract_blocks(A: sp.csr_matrix, index: np.ndarray) -> np.ndarray:
    """Dense principal submatrices A[idx, idx] for a stack of equal-size index rows."""
    npatch, s = index.shape
    out = np.empty((npatch, s, s))
    step = max(1, _CHUNK_ENTRIES // max(s * s, 1))
    for start in range(0, npatch, step):
        idx = index[start:start + step]
        rows = np.broadcast_to(idx[:, :, None], (idx.shape[0], s, s)).ravel()
        cols = np.broadcast_to(idx[:, None, :], (idx.shape[0], s, s)).ravel()
        out[start:start + step] = np.asarray(A[rows, cols]).reshape(idx.shape[0], s, s)
    return out


def unique_blocks(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bit-exact deduplication: (unique blocks, inverse index)."""
    npatch = blocks.shape[0]
    flat = np.ascontiguousarray(blocks.reshape(npatch, -1))
    seen: dict[bytes, int] = {}
    uniq: list[np.ndarray] = []
    inverse = np.empty(npatch, dtype=np.int64)
    step = max(1, _CHUNK_ENTRIES // max(flat.shape[1], 1))
    for start in range(0, npatch, step):
        chunk = flat[start:start + step]
        u, inv = np.unique(chunk, axis=0, return_inverse=True)
        inv = np.asarray(inv).reshape(-1)
        local_to_global = np.empty(len(u), dtype=np.int64)
        for j, row in enumerate(u):
            key = row.tobytes()
            gid = seen.get(key)
            if gid is None:
                gid = seen[key] = len(uniq)
                uniq.append(row)
            local_to_global[j] = gid
        inverse[start:start + step] = local_to_global[inv]
    s = blocks.shape[1]
    return np.stack(uniq).reshape(-1, s, s), inverse


# ─── patch containers ─────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class PatchGroup:
    """Patches sharing one size; rows sorted by factor id so equal factors are contiguous."""

    centers: np.ndarray  # (patches,)
    dofs: np.ndarray  # (patches, size)
    factor_id: np.ndarray  # (patches,) into ``blocks`` / ``factors``
    blocks: np.ndarray  # (unique, size, size)
    factors: np.ndarray  # lower Cholesky factors, reused by every solve

    @property
    def size(self) -> int:
        return self.dofs.shape[1]

    def __len__(self) -> int:
        return self.dofs.shape[0]

    def solve(self, r: np.ndarray) -> np.ndarray:
        """Local solves A_i^{-1} (R_i^T r) stacked as (patches, size)."""
        local = r[self.dofs]
        out = np.empty_like(local)
        nuniq = self.factors.shape[0]
        bounds = np.searchsorted(self.factor_id, np.arange(nuniq + 1))
        for u in range(nuniq):
            lo, hi = bounds[u], bounds[u + 1]
            if hi > lo:
                out[lo:hi] = cho_solve((self.factors[u], True), local[lo:hi].T, check_finite=False).T
        return out


@dataclass(frozen=True, eq=False)
class VertexPatch:
    center: int
    dofs: np.ndarray
    matrix: np.ndarray
    factor: np.ndarray

    def __len__(self) -> int:
        return self.dofs.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve((self.factor, True), rhs, check_finite=False)


class PatchSet(Sequence):
    """Sequence of vertex patches, ordered by center vertex id."""

    def __init__(self, groups: list[PatchGroup], ndofs: int):
        self.groups = groups
        self.ndofs = ndofs
        centers = np.concatenate([g.centers for g in groups]) if groups else np.zeros(0, dtype=np.int64)
        gid = np.concatenate([np.full(len(g), i) for i, g in enumerate(groups)]) if groups else centers
        row = np.concatenate([np.arange(len(g)) for g in groups]) if groups else centers
        order = np.argsort(centers, kind="stable")
        self._centers = centers[order]
        self._where = np.stack([gid[order], row[order]], axis=1) if groups else np.zeros((0, 2), dtype=np.int64)

    def __len__(self) -> int:
        return len(self._centers)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(f"patch index {i} out of range")
        g, row = self._where[i]
        grp = self.groups[g]
        fid = grp.factor_id[row]
        return VertexPatch(
            center=int(self._centers[i]),
            dofs=grp.dofs[row],
            matrix=grp.blocks[fid],
            factor=grp.factors[fid],
        )

    @property
    def centers(self) -> np.ndarray:
        return self._centers

    def apply(self, r: np.ndarray) -> np.ndarray:
        """Sum over patches of the zero-extended local solves."""
        y = np.zeros(self.ndofs)
        for grp in self.groups:
            local = grp.solve(r)
            y += np.bincount(grp.dofs.ravel(), weights=local.ravel(), minlength=self.ndofs)
        return y

    def stats(self) -> dict[str, float]:
        sizes = np.concatenate([np.full(len(g), g.size) for g in self.groups]) if self.groups else np.zeros(0)
        return {
            "patches": int(len(self)),
            "min_size": int(sizes.min()) if sizes.size else 0,
            "max_size": int(sizes.max()) if sizes.size else 0,
            "mean_size": float(sizes.mean()) if sizes.size else 0.0,
            "distinct_factors": int(sum(g.factors.shape[0] for g in self.groups)),
        }


def _factor_group(blocks: np.ndarray, centers: np.ndarray, inverse: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(blocks)
    except np.linalg.LinAlgError:
        for u in range(blocks.shape[0]):
            try:
                np.linalg.cholesky(blocks[u])
            except np.linalg.LinAlgError:
                vertex = int(centers[np.flatnonzero(inverse == u)[0]])
                raise PatchFactorizationError(
                    f"Patch block around vertex {vertex} is not SPD (size {blocks.shape[1]})"
                ) from None
        raise
    return L


def build_patches(
    A: sp.csr_matrix, mesh, dofmap: DofMap, dirichlet: Selector
) -> PatchSet:
    """One patch per vertex off the Dirichlet boundary, factored and grouped by size."""
    centers = interior_vertices(mesh, dirichlet)
    free = ~constrained_mask(dofmap, dirichlet)
    table = patch_index_table(dofmap, centers, free)
    sizes = (table >= 0).sum(axis=1)
    A = A.tocsr()
    groups: list[PatchGroup] = []
    for s in np.unique(sizes):
        sel = np.flatnonzero(sizes == s)
        dofs = table[sel, :s]
        blocks = extract_blocks(A, dofs)
        uniq, inverse = unique_blocks(blocks)
        L = _factor_group(uniq, centers[sel], inverse)
        order = np.argsort(inverse, kind="stable")
        groups.append(
            PatchGroup(
                centers=centers[sel][order],
                dofs=np.ascontiguousarray(dofs[order]),
                factor_id=inverse[order],
                blocks=uniq,
                factors=L,
            )
        )
    patches = PatchSet(groups, ndofs=dofmap.ndofs)
    st = patches.stats()
    logger.info(
        "Patches: %d (size min=%d max=%d mean=%.1f), %d distinct factors",
        st["patches"], st["min_size"], st["max_size"], st["mean_size"], st["distinct_factors"],
    )
    return patches

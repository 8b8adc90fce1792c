from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest
import scipy.sparse as sp

from src.assembly.boundary import apply_dirichlet, constrained_mask
from src.assembly.dofmap import DofMap, build_dofmap
from src.assembly.forms import ProblemSpec, assemble_operator, lame_from_young
from src.assembly.loads import assemble_rhs
from src.fe.basis import ElementBasis, build_basis
from src.mesh.structured import StructuredMesh, build_mesh


@dataclass
class System:
    mesh: StructuredMesh
    basis: ElementBasis
    dofmap: DofMap
    spec: ProblemSpec
    A: sp.csr_matrix
    b: np.ndarray

    @property
    def free(self) -> np.ndarray:
        return ~constrained_mask(self.dofmap, self.spec.dirichlet)


def assemble_system(
    family: str,
    k: int,
    cells: tuple[int, ...],
    spec: ProblemSpec | None = None,
    box=None,
    bcs: bool = True,
) -> System:
    dim = len(cells)
    spec = spec or ProblemSpec(kind="poisson", forcing="exp_sin_2d" if dim == 2 else "exp_sin_3d")
    mesh = build_mesh(dim, cells, box)
    basis = build_basis(family, k, dim)
    dofmap = build_dofmap(mesh, basis, spec.value_dim(dim))
    A = assemble_operator(mesh, basis, dofmap, spec)
    b = assemble_rhs(mesh, basis, dofmap, spec, apply_bcs=bcs)
    if bcs:
        apply_dirichlet(A, b, dofmap, spec.dirichlet)
    return System(mesh, basis, dofmap, spec, A, b)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def poisson_s2_8x8() -> System:
    return assemble_system("S", 2, (8, 8))


@pytest.fixture
def cantilever_spec() -> ProblemSpec:
    lam, mu = lame_from_young(1.0, 0.3)
    return ProblemSpec(kind="elasticity", forcing="gravity", dirichlet=("xmin",), lam=lam, mu=mu)


def random_free_vector(rng: np.random.Generator, free: np.ndarray) -> np.ndarray:
    x = rng.standard_normal(free.shape[0])
    x[~free] = 0.0
    return x

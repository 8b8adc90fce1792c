import numpy as np
import pytest

from src.fe.basis import MAX_VANDERMONDE_COND, build_basis
from src.fe.dofs import build_dof_functionals, dofs_per_entity, moment_indices
from src.fe.polynomials import dim_space, enumerate_monomials

CASES_2D = [(fam, k, 2) for fam in ("S", "Q") for k in range(1, 7)]
CASES_3D = [("S", k, 3) for k in range(1, 5)] + [("Q", k, 3) for k in range(1, 4)]


@pytest.mark.parametrize("family, k, dim", CASES_2D + CASES_3D)
def test_dual_basis_is_unisolvent(family, k, dim):
    basis = build_basis(family, k, dim)
    assert basis.ndofs == dim_space(family, k, dim)
    assert basis.vandermonde_cond < MAX_VANDERMONDE_COND
    np.testing.assert_allclose(basis.functional_matrix, np.eye(basis.ndofs), atol=1e-8)


@pytest.mark.parametrize("family, k, dim", [("S", 2, 2), ("S", 3, 2), ("Q", 2, 2), ("S", 4, 3)])
def test_dofs_per_entity_sum_to_space_dimension(family, k, dim):
    basis = build_basis(family, k, dim)
    from src.fe.dofs import reference_cell

    cell = reference_cell(dim)
    total = sum(cls.count * n for cls, n in zip(cell.entity_classes, basis.entity_dofs))
    assert total == basis.ndofs


def test_entity_dof_layouts():
    assert build_basis("S", 2, 2).entity_dofs == (1, 1, 1, 0)
    assert build_basis("Q", 3, 2).entity_dofs == (1, 2, 2, 4)
    assert build_basis("S", 4, 2).entity_dofs == (1, 3, 3, 1)
    assert dofs_per_entity("S", 4, 2) == 1
    assert dofs_per_entity("S", 5, 2) == 3
    assert dofs_per_entity("S", 6, 3) == 1
    assert dofs_per_entity("S", 5, 3) == 0


def test_serendipity_moment_indices_are_total_degree():
    assert moment_indices("S", 6, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert moment_indices("Q", 3, 2) == [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert moment_indices("Q", 1, 1) == []


def test_q1_basis_is_nodal_at_corners():
    basis = build_basis("Q", 1, 2)
    corners = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(basis.tabulate(corners), np.eye(4), atol=1e-12)


@pytest.mark.parametrize("family, k, dim", [("S", 3, 2), ("S", 4, 2), ("Q", 3, 2), ("S", 3, 3)])
def test_interpolation_reproduces_space(family, k, dim, rng):
    basis = build_basis(family, k, dim)
    pts = rng.uniform(-1, 1, size=(20, dim))
    for mono in enumerate_monomials(family, k, dim)[-3:]:
        e = np.asarray(mono.exponents)

        def f(x, e=e):
            return np.prod(x**e, axis=1)

        coeffs = basis.interpolate(f)
        np.testing.assert_allclose(basis.evaluate(coeffs, pts), f(pts), atol=1e-9)


def test_gradients_match_finite_differences(rng):
    basis = build_basis("S", 3, 2)
    x = rng.uniform(-0.9, 0.9, size=(4, 2))
    h = 1e-6
    grads = basis.tabulate_gradients(x)
    for d in range(2):
        step = np.zeros(2)
        step[d] = h
        fd = (basis.tabulate(x + step) - basis.tabulate(x - step)) / (2 * h)
        np.testing.assert_allclose(grads[:, :, d], fd, atol=1e-5)


def test_vertex_functionals_come_first_in_class_order():
    fns = build_dof_functionals("S", 3, 2)
    kinds = [f.kind for f in fns]
    assert kinds[:4] == ["vertex"] * 4
    assert kinds[4:] == ["edge"] * 8


@pytest.mark.parametrize("family, k, dim", [("S", 7, 2), ("P", 2, 2), ("S", 2, 1)])
def test_build_basis_rejects_unsupported(family, k, dim):
    with pytest.raises(ValueError):
        build_basis(family, k, dim)

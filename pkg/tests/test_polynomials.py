import numpy as np
import pytest

from src.fe.polynomials import (
    Monomial,
    PolySpace,
    dim_space,
    enumerate_monomials,
    exponent_array,
    monomial_gradients,
    monomial_values,
    superlinear_degree,
)

SERENDIPITY_DIMS_2D = {1: 4, 2: 8, 3: 12, 4: 17, 5: 23, 6: 30}
SERENDIPITY_DIMS_3D = {1: 8, 2: 20, 3: 32, 4: 50, 5: 74, 6: 105}


def test_superlinear_degree():
    assert superlinear_degree(Monomial((2, 3, 1))) == 5
    assert superlinear_degree((1, 1, 1)) == 0
    assert superlinear_degree((4, 0)) == 4


def test_monomial_rejects_negative_exponent():
    with pytest.raises(ValueError):
        Monomial((1, -1))


@pytest.mark.parametrize("k, expected", SERENDIPITY_DIMS_2D.items())
def test_serendipity_dimension_2d(k, expected):
    assert dim_space("S", k, 2) == expected
    assert len(enumerate_monomials("S", k, 2)) == expected


@pytest.mark.parametrize("k, expected", SERENDIPITY_DIMS_3D.items())
def test_serendipity_dimension_3d(k, expected):
    assert dim_space("S", k, 3) == expected
    assert len(enumerate_monomials("S", k, 3)) == expected


@pytest.mark.parametrize("family", ["P", "Q", "S"])
@pytest.mark.parametrize("dim", [1, 2, 3])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_closed_form_matches_enumeration(family, dim, k):
    assert dim_space(family, k, dim) == len(enumerate_monomials(family, k, dim))


def test_serendipity_s2_monomials_in_graded_lex_order():
    names = [str(m) for m in enumerate_monomials("S", 2, 2)]
    assert names == ["1", "x", "y", "x^2", "x*y", "y^2", "x^2*y", "x*y^2"]


def test_space_inclusions():
    for k in (1, 2, 3, 4):
        p = set(enumerate_monomials("P", k, 3))
        s = set(enumerate_monomials("S", k, 3))
        q = set(enumerate_monomials("Q", k, 3))
        assert p <= s <= q
    # S_1 is exactly Q_1
    assert enumerate_monomials("S", 1, 2) == enumerate_monomials("Q", 1, 2)


def test_q_and_p_closed_forms():
    assert dim_space("Q", 3, 3) == 64
    assert dim_space("P", 3, 2) == 10


@pytest.mark.parametrize("family, k, dim", [("X", 2, 2), ("S", 0, 2), ("Q", 2, 0)])
def test_invalid_space_arguments(family, k, dim):
    with pytest.raises(ValueError):
        dim_space(family, k, dim)


def test_polyspace_normalizes_family():
    space = PolySpace("s", 3, 2)
    assert space.family == "S"
    assert len(space) == 12
    assert space.exponents.shape == (12, 2)
    assert space.name == "S_3(2D)"


def test_monomial_values_and_gradients(rng):
    exps = exponent_array("Q", 2, 2)
    pts = rng.uniform(-1, 1, size=(5, 2))
    vals = monomial_values(exps, pts)
    grads = monomial_gradients(exps, pts)
    x, y = pts[:, 0], pts[:, 1]
    col = [tuple(e) for e in exps].index((2, 1))
    np.testing.assert_allclose(vals[:, col], x**2 * y)
    np.testing.assert_allclose(grads[:, col, 0], 2 * x * y)
    np.testing.assert_allclose(grads[:, col, 1], x**2)
    const = [tuple(e) for e in exps].index((0, 0))
    np.testing.assert_allclose(grads[:, const, :], 0.0)

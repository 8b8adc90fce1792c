import numpy as np
import pytest

from src.fe.quadrature import gauss_rule


def test_single_point_rule():
    rule = gauss_rule(1, 2)
    np.testing.assert_allclose(rule.points, [[0.0, 0.0]])
    np.testing.assert_allclose(rule.weights, [4.0])


def test_two_point_rule_integrates_x2y2():
    rule = gauss_rule(2, 2)
    x, y = rule.points[:, 0], rule.points[:, 1]
    assert rule.integrate(x**2 * y**2) == pytest.approx(4.0 / 9.0)


@pytest.mark.parametrize("q", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_weights_sum_to_reference_volume(q, dim):
    rule = gauss_rule(q, dim)
    assert len(rule) == q**dim
    assert rule.dim == dim
    assert rule.weights.sum() == pytest.approx(2.0**dim)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_exact_for_tensor_degree_2q_minus_1(q):
    rule = gauss_rule(q, 3)
    p = 2 * q - 2  # even; odd powers integrate to zero anyway
    vals = np.prod(rule.points**p, axis=1)
    assert rule.integrate(vals) == pytest.approx((2.0 / (p + 1)) ** 3)


def test_axis_zero_varies_fastest():
    rule = gauss_rule(2, 2)
    assert rule.points[0, 1] == rule.points[1, 1]
    assert rule.points[0, 0] != rule.points[1, 0]


def test_rejects_zero_points():
    with pytest.raises(ValueError):
        gauss_rule(0, 2)


def test_rule_arrays_are_read_only():
    rule = gauss_rule(3, 2)
    with pytest.raises(ValueError):
        rule.weights[0] = 1.0

import math

import numpy as np
import pytest

from hsunmix import euclidean_cost, hypersurface, robust_cost, robust_grad_h, robust_grad_w
from hsunmix.errors import DimensionMismatch


def finite_difference(objective, x, step=1e-6):
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        plus = x.copy()
        minus = x.copy()
        plus[idx] += step
        minus[idx] -= step
        grad[idx] = (objective(plus) - objective(minus)) / (2.0 * step)
    return grad


def random_instance(seed, m=3, l=4, p=2):
    rng = np.random.default_rng(seed)
    return rng.random((m, l)) + 0.1, rng.random((m, p)) + 0.1, rng.random((p, l)) + 0.1


def test_hypersurface_closed_forms():
    assert hypersurface(0.0) == 0.0
    assert abs(hypersurface(math.sqrt(3.0)) - 1.0) < 1e-12
    assert abs(hypersurface(-2.0) - (math.sqrt(5.0) - 1.0)) < 1e-12


def test_hypersurface_even_and_bounded():
    for t in np.linspace(-50.0, 50.0, 401):
        value = hypersurface(t)
        assert value >= 0.0
        assert value <= min(t * t / 2.0, abs(t)) + 1e-12
        assert abs(value - hypersurface(-t)) < 1e-12


def test_euclidean_cost_examples():
    v, w, h = random_instance(0)
    assert euclidean_cost(w @ h, w, h) == 0.0
    assert euclidean_cost([[2.0]], [[1.0]], [[1.0]]) == 1.0


def test_euclidean_cost_matches_double_loop_oracle():
    rng = np.random.default_rng(1)
    v = rng.random((5, 4))
    w = rng.random((5, 2))
    h = rng.random((2, 4))
    product = w @ h
    expected = 0.0
    for i in range(5):
        for j in range(4):
            expected += (v[i, j] - product[i, j]) ** 2
    assert abs(euclidean_cost(v, w, h) - expected) < 1e-12


def test_robust_cost_examples():
    v, w, h = random_instance(2)
    assert robust_cost(w @ h, w, h) == 0.0
    assert abs(robust_cost([[2.0]], [[1.0]], [[1.0]]) - 0.5 * (math.sqrt(2.0) - 1.0)) < 1e-15


def test_robust_cost_matches_elementwise_oracle():
    rng = np.random.default_rng(3)
    v = rng.random((4, 4))
    w = rng.random((4, 2))
    h = rng.random((2, 4))
    product = w @ h
    total = 0.0
    for i in range(4):
        for j in range(4):
            total += (v[i, j] - product[i, j]) ** 2
    expected = 0.5 * (math.sqrt(1.0 + total) - 1.0)
    assert abs(robust_cost(v, w, h) - expected) < 1e-12


def test_costs_zero_iff_zero_residual():
    v, w, h = random_instance(4)
    assert euclidean_cost(w @ h, w, h) == 0.0
    assert robust_cost(w @ h, w, h) == 0.0
    assert euclidean_cost(w @ h + 0.01, w, h) > 0.0
    assert robust_cost(w @ h + 0.01, w, h) > 0.0


def test_gradients_zero_at_exact_fit():
    v, w, h = random_instance(5)
    assert np.array_equal(robust_grad_w(w @ h, w, h), np.zeros_like(w))
    assert np.array_equal(robust_grad_h(w @ h, w, h), np.zeros_like(h))


def test_gradients_scalar_closed_form():
    expected = -1.0 / math.sqrt(2.0)
    assert abs(robust_grad_w([[2.0]], [[1.0]], [[1.0]])[0, 0] - expected) < 1e-15
    assert abs(robust_grad_h([[2.0]], [[1.0]], [[1.0]])[0, 0] - expected) < 1e-15


@pytest.mark.parametrize("seed", range(5))
def test_gradients_match_finite_differences(seed):
    v, w, h = random_instance(seed, m=3, l=4, p=2)
    fd_w = finite_difference(lambda x: 2.0 * robust_cost(v, x, h), w)
    fd_h = finite_difference(lambda x: 2.0 * robust_cost(v, w, x), h)
    an_w = robust_grad_w(v, w, h)
    an_h = robust_grad_h(v, w, h)
    for fd, an in ((fd_w, an_w), (fd_h, an_h)):
        rel = np.abs(fd - an) / np.maximum(np.abs(an), 1e-10)
        assert rel.max() < 1e-6


def test_costs_invariant_under_consistent_permutation():
    v, w, h = random_instance(7, m=4, l=5, p=3)
    perm = [2, 0, 1]
    w_p = w[:, perm]
    h_p = h[perm, :]
    assert abs(euclidean_cost(v, w, h) - euclidean_cost(v, w_p, h_p)) < 1e-12
    assert abs(robust_cost(v, w, h) - robust_cost(v, w_p, h_p)) < 1e-12


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        euclidean_cost(np.ones((2, 3)), np.ones((2, 2)), np.ones((3, 3)))
    with pytest.raises(DimensionMismatch):
        robust_cost(np.ones((2, 3)), np.ones((3, 2)), np.ones((2, 3)))
    with pytest.raises(DimensionMismatch):
        robust_grad_w(np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 2)))

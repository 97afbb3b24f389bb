import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maxflowseg.grid import box_neighborhood_sum, divergence, gradient, neighborhood_count

from .oracles import box_sum_loops, div_loops, grad_loops


def test_gradient_of_constant_is_zero():
    assert not gradient(np.full((4, 5), 3.0)).any()


def test_gradient_of_column_ramp():
    f = np.tile(np.arange(4.0), (4, 1))
    g = gradient(f)
    assert np.array_equal(g[0], np.zeros((4, 4)))
    assert np.array_equal(g[1][:, :-1], np.ones((4, 3)))
    assert np.array_equal(g[1][:, -1], np.zeros(4))


def test_gradient_matches_loops(rng):
    f = rng.random((3, 3))
    assert np.array_equal(gradient(f), grad_loops(f))


def test_divergence_of_zero_field():
    assert not divergence(np.zeros((2, 3, 3))).any()


def test_divergence_single_component():
    p = np.zeros((2, 3, 3))
    p[0, 0, 0] = 1.0
    expected = np.zeros((3, 3))
    expected[0, 0] = 1.0
    expected[1, 0] = -1.0
    assert np.array_equal(divergence(p), expected)


def test_divergence_matches_loops(rng):
    p = rng.normal(size=(2, 4, 6))
    np.testing.assert_allclose(divergence(p), div_loops(p), rtol=0, atol=1e-15)


def test_adjoint_identity_random_pairs(rng):
    for _ in range(20):
        f = rng.normal(size=(5, 5))
        p = rng.normal(size=(2, 5, 5))
        lhs = np.sum(divergence(p) * f)
        rhs = -np.sum(p * gradient(f))
        assert abs(lhs - rhs) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.data())
def test_adjoint_identity_any_shape(h, w, data):
    elems = st.floats(-10, 10, allow_nan=False)
    f = data.draw(arrays(np.float64, (h, w), elements=elems))
    p = data.draw(arrays(np.float64, (2, h, w), elements=elems))
    assert abs(np.sum(divergence(p) * f) + np.sum(p * gradient(f))) <= 1e-9


def test_div_grad_of_constant_is_zero():
    assert not divergence(gradient(np.full((6, 3), -2.5))).any()


def test_box_sum_radius_zero_is_identity(rng):
    f = rng.random((4, 7))
    out = box_neighborhood_sum(f, 0)
    assert np.array_equal(out, f)
    assert out is not f


def test_box_sum_counts_clipped_windows():
    out = box_neighborhood_sum(np.ones((5, 5)), 2)
    assert out[2, 2] == 25
    assert out[0, 0] == 9
    assert out[0, 4] == 9
    assert np.array_equal(out, neighborhood_count((5, 5), 2))


def test_box_sum_matches_loops(rng):
    f = rng.random((4, 4))
    np.testing.assert_allclose(box_neighborhood_sum(f, 1), box_sum_loops(f, 1), atol=1e-13)


@pytest.mark.parametrize("shape,radius", [((7, 3), 2), ((1, 9), 4), ((6, 6), 10)])
def test_box_sum_other_shapes(rng, shape, radius):
    f = rng.normal(size=shape)
    np.testing.assert_allclose(box_neighborhood_sum(f, radius), box_sum_loops(f, radius),
                               atol=1e-12)


def test_box_sum_rejects_negative_radius():
    with pytest.raises(ValueError):
        box_neighborhood_sum(np.ones((2, 2)), -1)


def test_operators_are_shape_preserving_and_deterministic(rng):
    f = rng.random((5, 8))
    assert gradient(f).shape == (2, 5, 8)
    assert divergence(gradient(f)).shape == (5, 8)
    assert np.array_equal(box_neighborhood_sum(f, 2), box_neighborhood_sum(f, 2))

import numpy as np
import pytest

from hsunmix import (
    AbundanceMatrix,
    EndmemberMatrix,
    HyperspectralCube,
    ModelDims,
    ObservationMatrix,
    flatten_cube,
    reconstruct,
    unflatten,
)
from hsunmix.errors import DimensionMismatch, InvalidValue


def cube_from(values, wavelengths=None):
    values = np.asarray(values, dtype=float)
    if wavelengths is None:
        wavelengths = 400.0 + 10.0 * np.arange(values.shape[2])
    return HyperspectralCube(values, wavelengths)


def test_flatten_single_pixel():
    cube = cube_from(np.array([[[0.1, 0.2, 0.3]]]))
    x = flatten_cube(cube)
    assert x.data.shape == (1, 3)
    assert np.array_equal(x.data[0], [0.1, 0.2, 0.3])


def test_flatten_row_major_order():
    values = np.array([[[1.0], [2.0]], [[3.0], [4.0]]])  # value r, c at (r, c)
    x = flatten_cube(cube_from(values))
    assert np.array_equal(x.data.ravel(), [1.0, 2.0, 3.0, 4.0])


def test_flatten_unflatten_roundtrip_bit_exact():
    rng = np.random.default_rng(5)
    values = rng.random((3, 4, 5))
    cube = cube_from(values)
    back = unflatten(flatten_cube(cube), 3, 4, cube.wavelengths)
    assert np.array_equal(back.values, cube.values)
    assert np.array_equal(back.wavelengths, cube.wavelengths)


def test_unflatten_trivials():
    cube = unflatten(np.array([[0.1, 0.2, 0.3]]), 1, 1, [400.0, 500.0, 600.0])
    assert cube.values.shape == (1, 1, 3)
    cube = unflatten(np.arange(4.0).reshape(4, 1), 2, 2, [400.0])
    assert np.array_equal(cube.values.reshape(4), [0.0, 1.0, 2.0, 3.0])


def test_unflatten_dimension_mismatch():
    x = np.ones((5, 3))
    with pytest.raises(DimensionMismatch):
        unflatten(x, 2, 2, [400.0, 500.0, 600.0])
    with pytest.raises(DimensionMismatch):
        unflatten(np.ones((4, 3)), 2, 2, [400.0, 500.0])


def test_reconstruct_trivials():
    out = reconstruct(np.array([[1.0]]), np.array([[0.5, 0.5]]))
    assert np.array_equal(out.data, [[0.5, 0.5]])
    out = reconstruct(np.array([[0.5, 0.5]]), np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.array_equal(out.data, [[0.5, 0.5]])


def test_reconstruct_matches_triple_loop_oracle():
    rng = np.random.default_rng(11)
    a = rng.random((4, 2))
    e = rng.random((2, 3))
    expected = np.zeros((4, 3))
    for i in range(4):
        for j in range(3):
            for k in range(2):
                expected[i, j] += a[i, k] * e[k, j]
    assert np.allclose(reconstruct(a, e).data, expected, atol=1e-12, rtol=0.0)


def test_reconstruct_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        reconstruct(np.ones((2, 3)), np.ones((2, 4)))


def test_reconstruct_nonnegative_and_convex_bounds():
    rng = np.random.default_rng(3)
    a = rng.random((6, 3))
    a /= a.sum(axis=1, keepdims=True)  # unit row sums
    e = rng.random((3, 5))             # rows in [0, 1]
    out = reconstruct(a, e).data
    assert out.min() >= 0.0
    assert out.max() <= 1.0 + 1e-12


def test_cube_invariants():
    with pytest.raises(InvalidValue):
        cube_from(-np.ones((1, 1, 2)))
    with pytest.raises(InvalidValue):
        cube_from(np.full((1, 1, 2), np.nan))
    with pytest.raises(InvalidValue):
        cube_from(np.ones((1, 1, 2)), wavelengths=[500.0, 400.0])
    with pytest.raises(DimensionMismatch):
        cube_from(np.ones((1, 1, 2)), wavelengths=[400.0])


def test_observation_matrix_invariants():
    with pytest.raises(InvalidValue):
        ObservationMatrix(np.array([[1.0, -0.1]]))
    with pytest.raises(DimensionMismatch):
        ObservationMatrix(np.ones(3))
    x = ObservationMatrix(np.ones((2, 3)))
    assert (x.n_pixels, x.n_bands) == (2, 3)


def test_endmember_matrix_rejects_zero_row():
    with pytest.raises(InvalidValue):
        EndmemberMatrix(np.array([[1.0, 2.0], [0.0, 0.0]]))
    e = EndmemberMatrix(np.ones((2, 3)), names=("a", "b"))
    assert e.names == ("a", "b")
    with pytest.raises(DimensionMismatch):
        EndmemberMatrix(np.ones((2, 3)), names=("a",))


def test_abundance_matrix_anc_only():
    a = AbundanceMatrix(np.array([[0.2, 0.8], [1.5, 0.0]]))  # no sum-to-one here
    assert a.data.shape == (2, 2)
    with pytest.raises(InvalidValue):
        AbundanceMatrix(np.array([[0.2, -0.8]]))


def test_model_dims_bounds():
    ModelDims(4, 3, 3)
    with pytest.raises(DimensionMismatch):
        ModelDims(4, 3, 4)
    with pytest.raises(DimensionMismatch):
        ModelDims(4, 3, 0)


def test_model_types_are_immutable():
    x = ObservationMatrix(np.ones((2, 2)))
    with pytest.raises(ValueError):
        x.data[0, 0] = 2.0

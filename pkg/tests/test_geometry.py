import numpy as np
import pytest

from orc.geometry import (Box, HalfSpace, as_unit_vector, as_vector,
                          coordinate_segment_endpoints, halfspace_contains,
                          linf_ball_contains, unit)


def test_as_vector_accepts_lists_and_arrays():
    v = as_vector([1.0, 2.0])
    assert v.dtype == np.float64
    np.testing.assert_array_equal(v, [1.0, 2.0])


def test_as_vector_rejects_matrices_and_scalars():
    with pytest.raises(ValueError):
        as_vector(np.eye(2))
    with pytest.raises(ValueError):
        as_vector(3.0)


def test_unit_normalizes():
    np.testing.assert_allclose(unit([3.0, 4.0]), [0.6, 0.8])
    with pytest.raises(ValueError):
        unit([0.0, 0.0])


def test_as_unit_vector_requires_unit_norm():
    as_unit_vector([0.6, 0.8])
    with pytest.raises(ValueError):
        as_unit_vector([0.6, 0.81])


def test_halfspace_requires_unit_normal_and_nonnegative_slack():
    h = HalfSpace([1.0, 0.0], [1.0, 0.0], 0.5)
    np.testing.assert_allclose(h.normal, [1.0, 0.0])
    with pytest.raises(ValueError):
        HalfSpace([2.0, 0.0], [0.0, 0.0], 0.0)
    with pytest.raises(ValueError):
        HalfSpace([1.0, 0.0], [0.0, 0.0], -0.1)


def test_halfspace_contains():
    h = HalfSpace([1.0, 0.0], [1.0, 0.0], 0.0)
    assert halfspace_contains(h, [0.5, 7.0])
    assert halfspace_contains(h, [1.0, 0.0])
    assert not halfspace_contains(h, [1.1, 0.0])


def test_linf_ball_contains():
    box = Box(np.zeros(2), 0.5)
    assert linf_ball_contains(box, [0.5, -0.5])
    assert not linf_ball_contains(box, [0.51, 0.0])


def test_coordinate_segment_endpoints_clamp_one_axis():
    box = Box(np.array([1.0, -1.0]), 0.25)
    z = np.array([1.1, -0.9])
    lo, hi = coordinate_segment_endpoints(box, z, 0)
    np.testing.assert_allclose(lo, [0.75, -0.9])
    np.testing.assert_allclose(hi, [1.25, -0.9])
    lo, hi = coordinate_segment_endpoints(box, z, 1)
    np.testing.assert_allclose(lo, [1.1, -1.25])
    np.testing.assert_allclose(hi, [1.1, -0.75])


def test_coordinate_segment_requires_point_in_box():
    box = Box(np.zeros(2), 0.1)
    with pytest.raises(ValueError):
        coordinate_segment_endpoints(box, np.array([0.5, 0.0]), 0)

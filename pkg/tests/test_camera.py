import math

import numpy as np
import pytest

from meshplug.camera import (
    Extrinsics,
    Intrinsics,
    bbox_encode,
    bbox_from_projection,
    intrinsics_from_fov,
    project,
    rotation_from_euler,
)
from meshplug.errors import BehindCameraError, DegenerateInputError

FULL_HD = (1920, 1080)


def test_default_fov_makes_focal_the_diagonal():
    intr = intrinsics_from_fov(*FULL_HD, 2.0 * math.atan(0.5))
    assert intr.focal == pytest.approx(math.hypot(*FULL_HD), rel=1e-12)
    assert intr.focal == pytest.approx(2202.91, abs=0.01)


def test_fov_55_degrees():
    intr = intrinsics_from_fov(*FULL_HD, math.radians(55.0))
    assert intr.focal == pytest.approx(2202.907 / (2.0 * math.tan(math.radians(27.5))), abs=0.01)
    assert intr.focal == pytest.approx(2115.8, abs=0.2)


def test_right_angle_fov():
    intr = intrinsics_from_fov(1000, 1000, math.pi / 2.0)
    assert intr.focal == pytest.approx(math.hypot(1000, 1000) / 2.0, rel=1e-12)
    assert intr.principal_point == (500.0, 500.0)


@pytest.mark.parametrize("args", [(0, 10, 1.0), (10, 10, 0.0), (10, 10, math.pi)])
def test_bad_intrinsics(args):
    with pytest.raises(DegenerateInputError):
        intrinsics_from_fov(*args)


def test_rotation_examples():
    np.testing.assert_array_equal(rotation_from_euler(0.0, 0.0, 0.0), np.eye(3))
    np.testing.assert_allclose(
        rotation_from_euler(math.pi / 2.0), [[1, 0, 0], [0, 0, -1], [0, 1, 0]], atol=1e-15
    )
    np.testing.assert_allclose(rotation_from_euler(math.radians(30.0)) @ [0, 0, 1], [0, -0.5, 0.8660254], atol=1e-7)


def test_rotations_are_orthonormal(rng):
    for pitch, roll, yaw in rng.uniform(-math.pi, math.pi, size=(1000, 3)):
        R = rotation_from_euler(pitch, roll, yaw)
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)


def test_extrinsics_wrap_angles():
    ext = Extrinsics(pitch=3.0 * math.pi / 2.0, roll=-math.pi, yaw=0.25)
    assert ext.pitch == pytest.approx(-math.pi / 2.0)
    assert ext.roll == pytest.approx(math.pi)
    assert ext.yaw == 0.25


def test_t_b_is_rotated_camera_center():
    ext = Extrinsics(0.3, 0.1, -0.7, (1.0, -2.0, 3.0))
    np.testing.assert_allclose(ext.t_b, ext.rotation @ np.array([1.0, -2.0, 3.0]))
    assert Extrinsics.from_dict(ext.to_dict()) == ext


def test_project_examples():
    intr = Intrinsics(1000.0, *FULL_HD)
    ext = Extrinsics()
    pixels = project(np.array([[0.0, 0.0, 5.0], [1.0, 0.0, 5.0]]), intr, ext, np.zeros(3))
    np.testing.assert_allclose(pixels, [[960.0, 540.0], [1160.0, 540.0]])


def test_project_behind_camera_names_the_point():
    intr = Intrinsics(1000.0, *FULL_HD)
    with pytest.raises(BehindCameraError) as info:
        project(np.array([[0.0, 0.0, 5.0], [0.0, 0.0, -1.0]]), intr, Extrinsics(), np.zeros(3))
    assert info.value.indices == (1,)


def test_project_scales_with_focal(rng):
    ext = Extrinsics(0.2, 0.05, 0.4)
    points = rng.uniform(-1.0, 1.0, size=(50, 3)) + (0.0, 0.0, 6.0)
    near = project(points, Intrinsics(500.0, 640, 480), ext, np.zeros(3)) - (320.0, 240.0)
    far = project(points, Intrinsics(1000.0, 640, 480), ext, np.zeros(3)) - (320.0, 240.0)
    np.testing.assert_allclose(far, 2.0 * near, atol=1e-9)


@pytest.mark.parametrize("depth", [0.5, 3.0, 40.0])
@pytest.mark.parametrize("pitch_deg", [1.0, 20.0, 44.0])
def test_positive_pitch_sees_straight_ahead_above_center(depth, pitch_deg):
    intr = Intrinsics(1000.0, 640, 480)
    ext = Extrinsics(math.radians(pitch_deg))
    pixel = project(np.array([[0.0, 0.0, depth]]), intr, ext, np.zeros(3))
    assert pixel[0, 1] < 240.0


def test_bbox_encode_worked_example():
    encoded = bbox_encode(100.0, -50.0, 300.0, *FULL_HD)
    np.testing.assert_allclose(encoded.as_tuple(), (0.04540, -0.02270, 0.13618), atol=1e-5)


def test_bbox_encode_centered_and_scale_invariant():
    f = math.hypot(*FULL_HD)
    assert bbox_encode(0.0, 0.0, 220.0, *FULL_HD).as_tuple() == (0.0, 0.0, 220.0 / f)
    base = bbox_encode(100.0, -50.0, 300.0, 1920, 1080).as_tuple()
    scaled = bbox_encode(400.0, -200.0, 1200.0, 7680, 4320).as_tuple()
    np.testing.assert_allclose(scaled, base, rtol=1e-15)


def test_bbox_encode_rejects_empty_box():
    with pytest.raises(DegenerateInputError):
        bbox_encode(0.0, 0.0, 0.0, *FULL_HD)


def test_bbox_from_projection_examples():
    assert bbox_from_projection(np.array([[960.0, 540.0]]), *FULL_HD) == (0.0, 0.0, 1.0)
    assert bbox_from_projection(np.array([[0.0, 0.0], [10.0, 20.0]]), *FULL_HD) == (-955.0, -530.0, 20.0)
    with pytest.raises(DegenerateInputError):
        bbox_from_projection(np.zeros((0, 2)), *FULL_HD)


def test_bbox_contains_every_point(rng):
    for _ in range(100):
        points = rng.uniform(-500.0, 2500.0, size=(int(rng.integers(1, 30)), 2))
        c_x, c_y, side = bbox_from_projection(points, *FULL_HD)
        lo = np.array([960.0 + c_x, 540.0 + c_y]) - side / 2.0
        assert np.all(points >= lo - 1e-9) and np.all(points <= lo + side + 1e-9)

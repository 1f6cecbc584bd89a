import math

import numpy as np
import pytest

from meshplug.body_model import lbs_forward
from meshplug.errors import DegenerateInputError, DimensionMismatchError
from meshplug.fitting import world_init
from meshplug.metrics import mpjpe, pa_mpjpe, procrustes_align, pve, w_mpjpe, wpve
from meshplug.rotations import rodrigues

from .conftest import level_builder


def _random_similarity(rng):
    return float(rng.uniform(0.5, 2.0)), rodrigues(rng.normal(size=3)), rng.normal(size=3)


def test_identical_inputs_score_zero(rng):
    points = rng.normal(size=(24, 3))
    assert mpjpe(points, points) == 0.0
    assert pve(points, points) == 0.0
    assert pa_mpjpe(points, points) == pytest.approx(0.0, abs=1e-9)
    assert w_mpjpe(points, points) == 0.0


def test_offset_of_five_millimeters(rng):
    points = rng.normal(size=(24, 3))
    shifted = points + np.array([0.003, 0.0, 0.004])
    assert mpjpe(shifted, points) == pytest.approx(5.0, rel=1e-9)
    assert pa_mpjpe(shifted, points) == pytest.approx(0.0, abs=1e-9)
    assert w_mpjpe(shifted, points) == pytest.approx(0.0, abs=1e-9)


def test_procrustes_identity_and_exact_similarity(rng):
    source = rng.normal(size=(30, 3))
    same = procrustes_align(source, source)
    assert same.scale == pytest.approx(1.0)
    np.testing.assert_allclose(same.rotation, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(same.translation, np.zeros(3), atol=1e-12)

    turn = rodrigues(np.array([0.0, 0.0, math.pi / 2.0]))
    target = 2.0 * source @ turn.T + (1.0, 2.0, 3.0)
    found = procrustes_align(source, target)
    assert found.scale == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(found.rotation, turn, atol=1e-9)
    np.testing.assert_allclose(found.translation, (1.0, 2.0, 3.0), atol=1e-9)
    np.testing.assert_allclose(found.inverse().apply(target), source, atol=1e-9)


def test_procrustes_beats_identity(rng):
    for _ in range(100):
        source, target = rng.normal(size=(12, 3)), rng.normal(size=(12, 3))
        aligned = procrustes_align(source, target).apply(source)
        assert np.sum((aligned - target) ** 2) <= np.sum((source - target) ** 2) + 1e-12


def test_procrustes_never_reflects(rng):
    source = rng.normal(size=(10, 3))
    mirrored = source * (-1.0, 1.0, 1.0)
    assert np.linalg.det(procrustes_align(source, mirrored).rotation) == pytest.approx(1.0)


def test_procrustes_ignores_row_order(rng):
    source, target = rng.normal(size=(15, 3)), rng.normal(size=(15, 3))
    order = rng.permutation(15)
    a = procrustes_align(source, target)
    b = procrustes_align(source[order], target[order])
    assert a.scale == pytest.approx(b.scale, abs=1e-10)
    np.testing.assert_allclose(a.rotation, b.rotation, atol=1e-10)
    np.testing.assert_allclose(a.translation, b.translation, atol=1e-10)


def test_pa_mpjpe_removes_any_similarity(rng):
    for _ in range(100):
        points = rng.normal(size=(24, 3))
        scale, rotation, shift = _random_similarity(rng)
        assert pa_mpjpe(points, scale * points @ rotation.T + shift) < 1e-9


def test_pa_mpjpe_never_exceeds_mpjpe(rng):
    for _ in range(1000):
        pred, gt = rng.normal(size=(8, 3)), rng.normal(size=(8, 3))
        assert pa_mpjpe(pred, gt) <= mpjpe(pred, gt) + 1e-9


def test_metrics_are_symmetric_under_relabeling(rng):
    pred, gt = rng.normal(size=(16, 3)), rng.normal(size=(16, 3))
    order = np.concatenate([[0], 1 + rng.permutation(15)])
    for metric in (mpjpe, pa_mpjpe, w_mpjpe):
        assert metric(pred[order], gt[order]) == pytest.approx(metric(pred, gt), abs=1e-9)


def test_world_metrics_equal_mpjpe_on_root_centered_input(rng):
    pred, gt = rng.normal(size=(16, 3)), rng.normal(size=(16, 3))
    pred -= pred[0]
    gt -= gt[0]
    assert w_mpjpe(pred, gt) == pytest.approx(mpjpe(pred, gt), rel=1e-12)
    assert wpve(pred, gt, pred[0], gt[0]) == pytest.approx(pve(pred, gt), rel=1e-12)


def test_degenerate_inputs(rng):
    with pytest.raises(DegenerateInputError):
        procrustes_align(rng.normal(size=(2, 3)), rng.normal(size=(2, 3)))
    line = np.outer(np.arange(5.0), (1.0, 2.0, 3.0))
    with pytest.raises(DegenerateInputError):
        procrustes_align(line, rng.normal(size=(5, 3)))
    with pytest.raises(DimensionMismatchError):
        mpjpe(np.zeros((3, 3)), np.zeros((4, 3)))


def test_transformed_prediction_beats_naive_world_reading(toy_spec, tmp_path):
    generator = level_builder(toy_spec, tmp_path, 20.0, yaw_deg=0.0, width=64, height=48).seed(11).build()
    for record in generator.records(50):
        truth = lbs_forward(toy_spec, record.heading_params(toy_spec))
        naive = lbs_forward(toy_spec, record.camera_params)
        lifted = lbs_forward(toy_spec, world_init(toy_spec, record.camera_params, record.pitch, record.t_b))
        assert w_mpjpe(naive.joints, truth.joints) > w_mpjpe(lifted.joints, truth.joints)
        assert w_mpjpe(lifted.joints, truth.joints) < 1e-6

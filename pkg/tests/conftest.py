from __future__ import annotations

import numpy as np
import pytest

from meshplug.body_model import NUM_BETAS, BodyParams, toy_body_spec
from meshplug.camera import intrinsics_from_fov
from meshplug.datagen import DatasetBuilder
from meshplug.fitting import FitConfig
from meshplug.types import PoseSource


@pytest.fixture(scope="session")
def toy_spec():
    return toy_body_spec()


@pytest.fixture(scope="session")
def small_intr():
    return intrinsics_from_fov(160, 120)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240501)


def random_params(rng: np.random.Generator, joint_count: int, pose_sigma: float = 0.3, shape_sigma: float = 0.5,
                  translation_sigma: float = 0.2) -> BodyParams:
    return BodyParams(
        rng.normal(0.0, pose_sigma, size=(joint_count, 3)),
        rng.normal(0.0, shape_sigma, size=NUM_BETAS),
        rng.normal(0.0, translation_sigma, size=3),
    )


def level_builder(spec, out_dir, pitch_deg: float, yaw_deg: float = 30.0, width: int = 160, height: int = 120):
    """Builder for scenes with a fixed pitch, no roll and a fixed heading."""
    return (
        DatasetBuilder(spec, out_dir)
        .pitch_range(pitch_deg, pitch_deg)
        .roll_range(0.0, 0.0)
        .yaw_range(yaw_deg, yaw_deg)
        .distance_range(3.0, 4.0)
        .pose_source(PoseSource.Jitter)
        .image_size(width, height)
    )


@pytest.fixture()
def level_record(toy_spec, tmp_path):
    """One noiseless record at 20 degrees pitch, zero roll."""
    return level_builder(toy_spec, tmp_path, 20.0).seed(3).build().record(0)


@pytest.fixture(scope="session")
def fast_cfg():
    return FitConfig(pitch_min_deg=-40.0, pitch_max_deg=40.0, pitch_step_deg=1.0, roll_min_deg=-5.0,
                     roll_max_deg=5.0, roll_step_deg=1.0)

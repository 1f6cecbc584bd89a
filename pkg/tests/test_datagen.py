import json
import math
import re

import numpy as np
import pytest

from meshplug.body_model import BodyParams, save_params
from meshplug.camera import Extrinsics
from meshplug.datagen import (
    BLOCK_COUNT,
    BLOCK_SIZE,
    MANIFEST_NAME,
    DatasetBuilder,
    SamplerRanges,
    SceneRecord,
    apply_block_mask,
    build_record_id,
    derive_child_seed,
    generate_record,
    masked_block_count,
    read_manifest,
    read_record,
    sample_camera,
    write_manifest,
)
from meshplug.errors import DimensionMismatchError, InvariantViolation, RecordError, SchemaError
from meshplug.rasterizer import CROP_SIZE, SENTINEL
from meshplug.types import PoseSource

from .conftest import level_builder, random_params


def _masked_blocks(grid):
    blocks = grid.reshape(CROP_SIZE // BLOCK_SIZE, BLOCK_SIZE, CROP_SIZE // BLOCK_SIZE, BLOCK_SIZE)
    return np.all(blocks == SENTINEL, axis=(1, 3))


def test_collapsed_ranges_give_a_fixed_camera(small_intr):
    ranges = SamplerRanges(pitch_deg=(10.0, 10.0), roll_deg=(0.0, 0.0), yaw_deg=(5.0, 5.0), distance_m=(3.0, 3.0),
                           offset_fraction=0.0)
    a, t_a = sample_camera(np.random.default_rng(1), ranges, small_intr)
    b, t_b = sample_camera(np.random.default_rng(2), ranges, small_intr)
    assert a.pitch == pytest.approx(math.radians(10.0)) and a.yaw == pytest.approx(math.radians(5.0))
    np.testing.assert_allclose(a.rotation, b.rotation, atol=1e-15)
    np.testing.assert_allclose(t_a, t_b, atol=1e-12)
    # the target (world origin) sits on the optical axis at the sampled distance
    np.testing.assert_allclose(-t_a, [0.0, 0.0, 3.0], atol=1e-12)


def test_sampled_angles_respect_their_ranges(small_intr):
    ranges = SamplerRanges(pitch_deg=(-20.0, 35.0), roll_deg=(-3.0, 3.0))
    rng = np.random.default_rng(5)
    cameras = [sample_camera(rng, ranges, small_intr)[0] for _ in range(1000)]
    pitches = np.degrees([camera.pitch for camera in cameras])
    rolls = np.degrees([camera.roll for camera in cameras])
    assert pitches.min() >= -20.0 and pitches.max() <= 35.0
    assert rolls.min() >= -3.0 and rolls.max() <= 3.0
    assert pitches.max() - pitches.min() > 50.0


def test_camera_sampling_is_deterministic(small_intr):
    ranges = SamplerRanges()
    first = [sample_camera(np.random.default_rng(9), ranges, small_intr)[1] for _ in range(3)]
    second = [sample_camera(np.random.default_rng(9), ranges, small_intr)[1] for _ in range(3)]
    np.testing.assert_array_equal(first, second)


def test_sampler_ranges_validation():
    with pytest.raises(InvariantViolation):
        SamplerRanges(pitch_deg=(10.0, -10.0))
    with pytest.raises(InvariantViolation):
        SamplerRanges(distance_m=(0.0, 1.0))
    with pytest.raises(InvariantViolation):
        SamplerRanges(pose_source=PoseSource.File)
    with pytest.raises(SchemaError):
        SamplerRanges(pitch_deg=10.0)
    with pytest.raises(SchemaError):
        SamplerRanges.from_dict({"pitch": [0, 1]})
    ranges = SamplerRanges(pitch_deg=(-5.0, 5.0), pose_source="zero")
    assert ranges.pose_source is PoseSource.Zero
    assert SamplerRanges.from_dict(ranges.to_dict()) == ranges


def test_level_camera_reads_the_world_body_directly(toy_spec, tmp_path, small_intr):
    world = BodyParams.zeros(toy_spec.joint_count).replace(translation=np.array([0.0, 0.0, 3.0]))
    record = generate_record(toy_spec, world, (Extrinsics(), np.zeros(3)), small_intr, tmp_path)
    assert record.camera_params.allclose(record.world_params, atol=1e-12)
    assert (tmp_path / record.depth_file).is_file()
    assert record.crop_file is None and record.mask is None


def test_mask_counts():
    assert masked_block_count(0.2) == 51
    assert masked_block_count(0.0) == 0
    assert masked_block_count(1.0) == BLOCK_COUNT == 256
    assert masked_block_count(0.5 / 256) == 0
    assert masked_block_count(1.5 / 256) == 2


def test_block_mask(rng):
    grid = rng.uniform(1.0, 5.0, size=(CROP_SIZE, CROP_SIZE))

    same, blocks = apply_block_mask(grid, 0.0, 3)
    np.testing.assert_array_equal(same, grid)
    assert len(blocks) == 0

    full, blocks = apply_block_mask(grid, 1.0, 3)
    assert np.all(full == SENTINEL)
    np.testing.assert_array_equal(blocks, np.arange(BLOCK_COUNT))

    masked, blocks = apply_block_mask(grid, 0.2, 3)
    assert len(blocks) == 51 and np.all(np.diff(blocks) > 0)
    hit = _masked_blocks(masked)
    assert np.count_nonzero(hit) == 51
    assert set(np.flatnonzero(hit)) == set(blocks.tolist())
    np.testing.assert_array_equal(masked[~np.repeat(np.repeat(hit, BLOCK_SIZE, 0), BLOCK_SIZE, 1)],
                                  grid[~np.repeat(np.repeat(hit, BLOCK_SIZE, 0), BLOCK_SIZE, 1)])

    again, blocks_again = apply_block_mask(grid, 0.2, 3)
    np.testing.assert_array_equal(again, masked)
    np.testing.assert_array_equal(blocks_again, blocks)
    assert np.all(grid != SENTINEL)


def test_block_mask_rejects_bad_input(rng):
    with pytest.raises(DimensionMismatchError):
        apply_block_mask(np.ones((128, 128)), 0.2, 0)
    with pytest.raises(InvariantViolation):
        apply_block_mask(np.ones((CROP_SIZE, CROP_SIZE)), 1.5, 0)


def test_child_seeds_and_record_ids():
    assert derive_child_seed(7, 3) == derive_child_seed(7, 3)
    assert 0 <= derive_child_seed(7, 3) < 2 ** 63
    assert len({derive_child_seed(7, i) for i in range(1000)}) == 1000
    assert derive_child_seed(7, 3) != derive_child_seed(8, 3)
    assert derive_child_seed(7, 3) != derive_child_seed(7, 3, namespace="mask")

    record_id = build_record_id(7, 12)
    assert re.fullmatch(r"000012-[a-z2-7]{8}", record_id)
    assert record_id == build_record_id(7, 12)
    with pytest.raises(ValueError):
        derive_child_seed(7, -1)


def test_record_round_trip(level_record):
    data = json.loads(json.dumps(level_record.to_dict()))
    again = SceneRecord.from_dict(data)
    assert again.to_dict() == level_record.to_dict()
    assert again.validate() is again
    with pytest.raises(SchemaError):
        SceneRecord.from_dict({**data, "schema": 2})
    with pytest.raises(SchemaError):
        SceneRecord.from_dict({key: value for key, value in data.items() if key != "t_b"})


def test_manifest_keeps_reading_past_bad_lines(toy_spec, tmp_path):
    generator = level_builder(toy_spec, tmp_path, 10.0, width=64, height=48).seed(1).build()
    records = list(generator.records(3))
    path = write_manifest(tmp_path / MANIFEST_NAME, records)

    lines = path.read_text(encoding="utf-8").splitlines()
    broken = json.loads(lines[2])
    broken["keypoints2d"][0][0] += 5.0
    path.write_text("\n".join([lines[0], "{not json", json.dumps(broken), lines[1]]) + "\n", encoding="utf-8")

    good, errors = read_manifest(path)
    assert [record.record_id for record in good] == [records[0].record_id, records[1].record_id]
    assert [error.line_number for error in errors] == [2, 3]
    assert "reprojection" in str(errors[1])

    unchecked, errors = read_manifest(path, validate=False)
    assert len(unchecked) == 3 and len(errors) == 1
    assert read_record(path, 4).record_id == records[1].record_id
    with pytest.raises(RecordError) as failure:
        read_record(path, 2)
    assert failure.value.line_number == 2


def test_generated_dataset_revalidates_on_load(toy_spec, tmp_path):
    generator = (
        DatasetBuilder(toy_spec, tmp_path)
        .image_size(64, 48)
        .seed(21)
        .validate_records(False)
        .build()
    )
    path = generator.generate(100)
    records, errors = read_manifest(path)
    assert len(records) == 100 and not errors
    assert [record.index for record in records] == list(range(100))
    for record in records:
        lo, hi = SamplerRanges().pitch_deg
        assert lo <= math.degrees(record.pitch) <= hi


def test_generation_is_bitwise_reproducible(toy_spec, tmp_path):
    def build(out_dir):
        return (
            DatasetBuilder(toy_spec, out_dir)
            .image_size(64, 48)
            .mask_ratio(0.2)
            .seed(33)
            .build()
        )

    first = build(tmp_path / "a")
    second = build(tmp_path / "b")
    first.generate(4)
    second.generate(4)
    assert first.manifest_path.read_bytes() == second.manifest_path.read_bytes()
    a_files = sorted(p.relative_to(first.out_dir) for p in first.out_dir.rglob("*.pfm"))
    b_files = sorted(p.relative_to(second.out_dir) for p in second.out_dir.rglob("*.pfm"))
    assert a_files == b_files and len(a_files) == 8
    for name in a_files:
        assert (first.out_dir / name).read_bytes() == (second.out_dir / name).read_bytes()


def test_masked_crop_is_stored_with_the_record(toy_spec, tmp_path):
    record = DatasetBuilder(toy_spec, tmp_path).image_size(64, 48).mask_ratio(0.2).seed(2).build().record(0)
    crop = record.load_crop(tmp_path)
    assert (crop.width, crop.height) == (CROP_SIZE, CROP_SIZE)
    assert record.mask.ratio == 0.2 and len(record.mask.blocks) == 51
    hit = _masked_blocks(crop.depth)
    assert set(record.mask.blocks) <= set(np.flatnonzero(hit).tolist())


def test_record_does_not_depend_on_generation_order(toy_spec, tmp_path):
    generator = DatasetBuilder(toy_spec, tmp_path).image_size(64, 48).seed(4).build()
    forward = [generator.record(i).to_dict() for i in range(3)]
    backward = [generator.record(i).to_dict() for i in reversed(range(3))]
    assert forward == list(reversed(backward))


def test_builder_rejects_bad_settings(toy_spec, tmp_path):
    with pytest.raises(InvariantViolation):
        DatasetBuilder(toy_spec, tmp_path).mask_ratio(1.5).build()
    with pytest.raises(InvariantViolation):
        DatasetBuilder(toy_spec, tmp_path).pitch_range(5.0, -5.0).build()


def test_poses_come_from_the_pose_file(toy_spec, tmp_path, rng):
    bank = [random_params(rng, toy_spec.joint_count, translation_sigma=0.0) for _ in range(3)]
    pose_file = save_params(tmp_path / "poses.json", bank)
    generator = (
        DatasetBuilder(toy_spec, tmp_path / "out")
        .pose_source(PoseSource.File, str(pose_file))
        .image_size(64, 48)
        .seed(6)
        .build()
    )
    for record in generator.records(5):
        assert any(np.array_equal(record.world_params.pose, entry.pose) for entry in bank)

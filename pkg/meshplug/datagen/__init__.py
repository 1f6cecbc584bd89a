"""
Synthetic scene generation.

Submodules:
- `sampler_ranges`: SamplerRanges
- `generator_config`: mutable settings bag behind the builder
- `dataset_builder`: fluent DatasetBuilder
- `generator`: body/camera sampling, record generation, DatasetGenerator
- `record`: SceneRecord and manifest I/O
- `masking`: block masking of depth crops
- `seeding`: child seeds and record ids
"""
from .sampler_ranges import SamplerRanges
from .seeding import build_record_id, derive_child_seed
from .masking import BLOCK_COUNT, BLOCK_SIZE, apply_block_mask, masked_block_count
from .record import (
    MANIFEST_NAME,
    MaskInfo,
    SceneRecord,
    iter_manifest,
    read_manifest,
    read_record,
    write_manifest,
    write_record,
)
from .generator import DatasetGenerator, camera_frame_params, generate_record, sample_body, sample_camera
from .dataset_builder import DatasetBuilder

__all__ = [
    "SamplerRanges",
    "build_record_id",
    "derive_child_seed",
    "BLOCK_COUNT",
    "BLOCK_SIZE",
    "apply_block_mask",
    "masked_block_count",
    "MANIFEST_NAME",
    "MaskInfo",
    "SceneRecord",
    "iter_manifest",
    "read_manifest",
    "read_record",
    "write_manifest",
    "write_record",
    "DatasetGenerator",
    "camera_frame_params",
    "generate_record",
    "sample_body",
    "sample_camera",
    "DatasetBuilder",
]

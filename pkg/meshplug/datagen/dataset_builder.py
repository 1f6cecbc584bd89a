from __future__ import annotations

import math
from typing import Optional

from ..body_model import BodyModelSpec, load_params_list
from ..camera import intrinsics_from_fov
from ..errors import InvariantViolation
from ..setup_logging import get_logger
from ..types import PoseSource
from .generator import DatasetGenerator
from .generator_config import GeneratorConfig
from .sampler_ranges import SamplerRanges

logger = get_logger("DatasetBuilder")


class DatasetBuilder:
    def __init__(self, spec: BodyModelSpec, out_dir, spec_ref: str = "toy"):
        """
        Initialize a dataset builder for one body model and output directory.

        Every fluent method only records a setting; ranges, image size and
        the pose file are validated once during `build()`.

        :param spec: body model the scenes are posed with.
        :param out_dir: directory receiving `manifest.jsonl` and `depth/`.
        :param spec_ref: name or path stored in every record to identify `spec`.
        """
        self._config = GeneratorConfig(spec, out_dir, spec_ref)

    def pitch_range(self, lo_deg: float, hi_deg: float) -> DatasetBuilder:
        """
        Camera pitch range. Default: -45..45 degrees

        :return: DatasetBuilder
        """
        self._config.ranges["pitch_deg"] = (lo_deg, hi_deg)
        return self

    def roll_range(self, lo_deg: float, hi_deg: float) -> DatasetBuilder:
        """
        Camera roll range. Default: -15..15 degrees

        :return: DatasetBuilder
        """
        self._config.ranges["roll_deg"] = (lo_deg, hi_deg)
        return self

    def yaw_range(self, lo_deg: float, hi_deg: float) -> DatasetBuilder:
        """
        Camera yaw range. Default: -180..180 degrees

        :return: DatasetBuilder
        """
        self._config.ranges["yaw_deg"] = (lo_deg, hi_deg)
        return self

    def distance_range(self, lo_m: float, hi_m: float) -> DatasetBuilder:
        """
        Distance from the camera to the body root. Default: 2..6 m

        :return: DatasetBuilder
        """
        self._config.ranges["distance_m"] = (lo_m, hi_m)
        return self

    def offset_fraction(self, fraction: float) -> DatasetBuilder:
        """
        Off-axis placement of the root as a fraction of the distance. Default: 0.1

        :return: DatasetBuilder
        """
        self._config.ranges["offset_fraction"] = fraction
        return self

    def body_offset(self, meters: float) -> DatasetBuilder:
        """
        Horizontal world placement of the body within +-meters. Default: 1.0

        :return: DatasetBuilder
        """
        self._config.ranges["body_offset_m"] = meters
        return self

    def shape_sigma(self, sigma: float) -> DatasetBuilder:
        """
        Standard deviation of the sampled shape coefficients. Default: 0.5

        :return: DatasetBuilder
        """
        self._config.ranges["shape_sigma"] = sigma
        return self

    def pose_source(self, source: PoseSource, pose_file: Optional[str] = None) -> DatasetBuilder:
        """
        Where body poses come from.

        :param source: zero pose, seeded jitter, or a pose file.
        :param pose_file: JSON array of params objects, required for the file source.
        :return: DatasetBuilder
        """
        self._config.ranges["pose_source"] = source
        self._config.ranges["pose_file"] = pose_file
        return self

    def ranges(self, ranges: SamplerRanges) -> DatasetBuilder:
        """
        Replace every sampling setting at once, e.g. with ranges loaded from JSON.

        :return: DatasetBuilder
        """
        self._config.ranges = ranges.to_dict()
        return self

    def image_size(self, width: int, height: int) -> DatasetBuilder:
        """
        Rendered image size. Default: 320x240

        :return: DatasetBuilder
        """
        self._config.width = width
        self._config.height = height
        return self

    def fov(self, fov_deg: float) -> DatasetBuilder:
        """
        Diagonal field of view. Default: 53.13 degrees (focal = image diagonal)

        :return: DatasetBuilder
        """
        self._config.fov_diag = math.radians(fov_deg)
        return self

    def mask_ratio(self, ratio: float) -> DatasetBuilder:
        """
        Fraction of 16x16 blocks blanked in the stored 256x256 depth crop.
        Default: 0 (no crop is stored)

        :return: DatasetBuilder
        """
        self._config.mask_ratio = ratio
        return self

    def seed(self, seed: int) -> DatasetBuilder:
        """
        Master seed; record i uses a child seed derived from (seed, i).

        :return: DatasetBuilder
        """
        self._config.seed = int(seed)
        return self

    def validate_records(self, enabled: bool = True) -> DatasetBuilder:
        """
        Re-check every generated record against its invariants. Default: on

        :return: DatasetBuilder
        """
        self._config.validate_records = enabled
        return self

    def build(self) -> DatasetGenerator:
        config = self._config
        ranges = config.sampler_ranges()
        intr = intrinsics_from_fov(config.width, config.height, config.fov_diag)
        if config.mask_ratio is not None and not 0.0 <= config.mask_ratio <= 1.0:
            raise InvariantViolation(f"mask_ratio is invalid: must lie in [0, 1], got {config.mask_ratio!r}.")
        if config.has_pose_file:
            config.pose_bank = load_params_list(config.ranges["pose_file"])
            logger.info(f"{len(config.pose_bank)} pose(s) loaded from {config.ranges['pose_file']}")
        logger.debug(f"dataset generator ready: {config.width}x{config.height}, seed {config.seed}")
        return DatasetGenerator(config, ranges, intr)


__all__ = ["DatasetBuilder"]

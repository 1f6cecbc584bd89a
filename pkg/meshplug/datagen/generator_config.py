from pathlib import Path

from ..camera import DEFAULT_FOV_DIAG
from .sampler_ranges import SamplerRanges

DEFAULT_WIDTH = 320
DEFAULT_HEIGHT = 240


class GeneratorConfig:
    def __init__(self, spec, out_dir, spec_ref="toy"):
        self.spec = spec
        self.spec_ref = spec_ref
        self.out_dir = Path(out_dir)

        self.ranges = {}
        self.pose_bank = None

        self.width = DEFAULT_WIDTH
        self.height = DEFAULT_HEIGHT
        self.fov_diag = DEFAULT_FOV_DIAG

        self.seed = 0
        self.mask_ratio = 0.0
        self.validate_records = True

    def sampler_ranges(self):
        return SamplerRanges(**self.ranges)

    @property
    def has_mask(self):
        return self.mask_ratio is not None and self.mask_ratio > 0.0

    @property
    def has_pose_file(self):
        return self.ranges.get("pose_file") is not None

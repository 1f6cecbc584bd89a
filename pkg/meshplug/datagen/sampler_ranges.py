from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from ..errors import InvariantViolation, SchemaError
from ..rasterizer import NEAR_PLANE
from ..types import PoseSource

Range = Tuple[float, float]


@dataclass(frozen=True)
class SamplerRanges:
    """
    Uniform sampling ranges for synthetic scenes.

    Angles are degrees, distances meters. `offset_fraction` shifts the body
    root off the optical axis by up to that fraction of the camera distance;
    `body_offset_m` moves the body horizontally in the world.
    """

    pitch_deg: Range = (-45.0, 45.0)
    roll_deg: Range = (-15.0, 15.0)
    yaw_deg: Range = (-180.0, 180.0)
    distance_m: Range = (2.0, 6.0)
    offset_fraction: float = 0.1
    body_offset_m: float = 1.0
    shape_sigma: float = 0.5
    pose_source: PoseSource = PoseSource.Jitter
    pose_file: Optional[str] = None

    def __post_init__(self):
        for name in ("pitch_deg", "roll_deg", "yaw_deg", "distance_m"):
            value = getattr(self, name)
            try:
                lo, hi = (float(v) for v in value)
            except (TypeError, ValueError) as e:
                raise SchemaError(f"{name} is invalid: expected a [lo, hi] pair.") from e
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise InvariantViolation(f"{name} is invalid: range [{lo}, {hi}] is not well-ordered.")
            object.__setattr__(self, name, (lo, hi))
        if self.distance_m[0] <= NEAR_PLANE:
            raise InvariantViolation(f"distance_m is invalid: must stay beyond the near plane ({NEAR_PLANE} m).")
        if not 0.0 <= self.offset_fraction < 1.0:
            raise InvariantViolation(f"offset_fraction is invalid: must lie in [0, 1), got {self.offset_fraction!r}.")
        for name in ("body_offset_m", "shape_sigma"):
            if not float(getattr(self, name)) >= 0.0:
                raise InvariantViolation(f"{name} is invalid: must be >= 0.")
        try:
            object.__setattr__(self, "pose_source", PoseSource(self.pose_source))
        except ValueError as e:
            raise SchemaError(f"pose_source is invalid: {e}.") from e
        if self.pose_source is PoseSource.File and not self.pose_file:
            raise InvariantViolation("pose_file is invalid: required when pose_source is 'file'.")

    def replace(self, **changes) -> "SamplerRanges":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        for name in ("pitch_deg", "roll_deg", "yaw_deg", "distance_m"):
            data[name] = list(data[name])
        data["pose_source"] = self.pose_source.value
        return data

    @classmethod
    def from_dict(cls, data: Any) -> "SamplerRanges":
        if not isinstance(data, dict):
            raise SchemaError("ranges is invalid: expected an object.")
        known = {item.name for item in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SchemaError(f"ranges is invalid: unknown key(s) {', '.join(unknown)}.")
        return cls(**data)


__all__ = ["SamplerRanges"]

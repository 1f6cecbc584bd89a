from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Tuple, Union

from ..errors import InvariantViolation, SchemaError, SpecNotFoundError
from ..losses import LossWeights
from ..types import DescentDirection

PathLike = Union[str, Path]


@dataclass(frozen=True)
class FitConfig:
    """Optimizer, line-search and pitch-search settings. Angles in the JSON form are degrees."""

    max_iters: int = 500
    grad_tol: float = 1e-6
    loss_tol: float = 1e-14
    armijo_c: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1.0
    min_step: float = 1e-10
    direction: DescentDirection = DescentDirection.GaussNewton
    damping: float = 1e-6
    pitch_min_deg: float = -60.0
    pitch_max_deg: float = 60.0
    pitch_step_deg: float = 0.5
    pitch_tol: float = 1e-4
    roll_min_deg: float = -30.0
    roll_max_deg: float = 30.0
    roll_step_deg: float = 1.0
    min_overlap: float = 0.5
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "direction", DescentDirection(self.direction))
        if int(self.max_iters) < 1:
            raise InvariantViolation(f"max_iters is invalid: must be >= 1, got {self.max_iters}.")
        for name in ("grad_tol", "loss_tol", "armijo_c", "initial_step", "min_step", "pitch_step_deg",
                     "pitch_tol", "roll_step_deg"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise InvariantViolation(f"{name} is invalid: must be > 0, got {value!r}.")
        if not 0.0 < self.shrink < 1.0:
            raise InvariantViolation(f"shrink is invalid: must lie in (0, 1), got {self.shrink!r}.")
        if self.damping < 0.0:
            raise InvariantViolation(f"damping is invalid: must be >= 0, got {self.damping!r}.")
        if self.pitch_min_deg > self.pitch_max_deg:
            raise InvariantViolation("pitch range is invalid: pitch_min_deg exceeds pitch_max_deg.")
        if self.roll_min_deg > self.roll_max_deg:
            raise InvariantViolation("roll range is invalid: roll_min_deg exceeds roll_max_deg.")
        if not 0.0 <= self.min_overlap <= 1.0:
            raise InvariantViolation(f"min_overlap is invalid: must lie in [0, 1], got {self.min_overlap!r}.")

    def replace(self, **changes) -> "FitConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        data = {item.name: getattr(self, item.name) for item in dataclasses.fields(self)}
        data["direction"] = self.direction.value
        data["weights"] = self.weights.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Any) -> "FitConfig":
        if not isinstance(data, dict):
            raise SchemaError("fit config is invalid: expected an object.")
        known = {item.name for item in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SchemaError(f"fit config is invalid: unknown key(s) {', '.join(unknown)}.")
        values = dict(data)
        if "weights" in values:
            values["weights"] = LossWeights.from_dict(values["weights"])
        try:
            return cls(**values)
        except (TypeError, ValueError) as e:
            if isinstance(e, (InvariantViolation, SchemaError)):
                raise
            raise SchemaError(f"fit config is invalid: {e}.") from e

    @classmethod
    def load(cls, path: PathLike) -> "FitConfig":
        path = Path(path)
        if not path.is_file():
            raise SpecNotFoundError(f"fit config not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise SchemaError(f"fit config is invalid: {path} is not valid JSON ({e.msg}).") from e
        return cls.from_dict(data)


@dataclass(frozen=True)
class FitReport:
    """
    Outcome of one fit or search.

    `status` is "converged", "max-iters" or "stalled" for mesh fits and
    "ok" for pitch searches. `history` holds the loss after every accepted
    step, starting with the initial loss.
    """

    final_loss: float
    iterations: int
    terms: Dict[str, float]
    converged: bool
    status: str
    initial_loss: float = math.nan
    history: Tuple[float, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "final_loss": self.final_loss,
            "initial_loss": self.initial_loss,
            "iterations": self.iterations,
            "terms": dict(self.terms),
            "converged": self.converged,
            "status": self.status,
        }


__all__ = ["FitConfig", "FitReport"]

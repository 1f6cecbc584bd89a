"""Exception hierarchy shared by every meshplug module."""
from __future__ import annotations

from typing import Optional, Sequence


class MeshPlugError(Exception):
    """Base class for all errors raised by meshplug."""


class SpecNotFoundError(MeshPlugError, FileNotFoundError):
    """A body spec, params file or manifest does not exist."""


class SchemaError(MeshPlugError, ValueError):
    """A JSON artifact is malformed or has wrongly shaped fields."""


class InvariantViolation(MeshPlugError, ValueError):
    """A parsed object breaks one of its declared invariants."""


class DimensionMismatchError(MeshPlugError, ValueError):
    """Body parameters do not match the body model they are applied to."""


class DegenerateInputError(MeshPlugError, ValueError):
    """Empty, zero-size or rank-deficient input."""


class BehindCameraError(MeshPlugError, ValueError):
    def __init__(self, message: str, indices: Sequence[int] = ()):
        super().__init__(message)
        self.indices = tuple(int(i) for i in indices)


class InfeasibleError(MeshPlugError, RuntimeError):
    """No candidate of a search produced a finite score."""


class FitError(MeshPlugError, RuntimeError):
    """A fit cannot start (non-finite loss at the initial point)."""


class RecordError(MeshPlugError, ValueError):
    def __init__(self, message: str, line_number: Optional[int] = None):
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line_number = line_number


__all__ = [
    "MeshPlugError",
    "SpecNotFoundError",
    "SchemaError",
    "InvariantViolation",
    "DimensionMismatchError",
    "DegenerateInputError",
    "BehindCameraError",
    "InfeasibleError",
    "FitError",
    "RecordError",
]

from __future__ import annotations

from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..errors import SchemaError, SpecNotFoundError
from .params import Mesh


def write_obj(mesh: Mesh, path: Union[str, Path]) -> Path:
    """Wavefront OBJ: `v` lines then 1-indexed `f` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_obj(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """Read vertices and triangle faces (0-indexed) back from an OBJ file."""
    path = Path(path)
    if not path.is_file():
        raise SpecNotFoundError(f"mesh not found: {path}")
    vertices, faces = [], []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "v":
                vertices.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                # "f 1/1/1 2/2/2 3/3/3" keeps only the vertex index
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
        except ValueError as e:
            raise SchemaError(f"obj is invalid: line {number}: {e}.") from e
    return np.array(vertices, dtype=np.float64).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)


__all__ = ["write_obj", "read_obj"]

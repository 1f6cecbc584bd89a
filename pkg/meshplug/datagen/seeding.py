from __future__ import annotations

import base64
import hashlib

_SEPARATOR = "\x1f"


def _content(master_seed: int, index: int, namespace: str) -> bytes:
    if index < 0:
        raise ValueError("index is invalid: must be >= 0.")
    return f"{namespace}{_SEPARATOR}{int(master_seed)}{_SEPARATOR}{int(index)}".encode("utf-8")


def derive_child_seed(master_seed: int, index: int, namespace: str = "record") -> int:
    """
    Deterministic 63-bit seed for item `index` of a run seeded with `master_seed`.

    Depends only on its arguments, so records can be generated in any order
    or in parallel and still come out identical.
    """
    raw = hashlib.blake2s(_content(master_seed, index, namespace), digest_size=8).digest()
    return int.from_bytes(raw, "little") >> 1


def build_record_id(master_seed: int, index: int, length: int = 8) -> str:
    """`<index>-<token>` with a lowercase base32 token, e.g. `000007-k3j5q2xa`."""
    if length < 1:
        raise ValueError("length is invalid: must be >= 1.")
    raw = hashlib.blake2s(_content(master_seed, index, "record-id"), digest_size=10).digest()
    token = base64.b32encode(raw).decode("ascii").rstrip("=").lower()[:length]
    return f"{index:06d}-{token}"


__all__ = ["derive_child_seed", "build_record_id"]

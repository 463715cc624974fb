# Python standard library imports
import json
import logging
import math
import struct
from typing import Any, Dict, Mapping, Optional

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.checkpoint_exception import CheckpointCorruptionException
from app.models.checkpoint.checkpoint import Checkpoint

"""
SUMMARY:

Binary checkpoint layout, all integers little-endian:

    "PMOE" | version u32 | metadata length u64 | UTF-8 JSON metadata |
    tensor count u32 | per tensor: name length u32, UTF-8 name, rank u32,
    dims u32 each, values as float64 row-major

Metadata JSON is written with sorted keys and fixed separators, and tensors
in table order, so decoding and re-encoding reproduces the same bytes.
"""

logger = logging.getLogger(__name__)

MAGIC = b"PMOE"
FORMAT_VERSION = 1


def encode_metadata(metadata: Mapping[str, Any]) -> bytes:
    return json.dumps(metadata, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def encode_checkpoint(metadata: Mapping[str, Any], tensors: Mapping[str, np.ndarray]) -> bytes:
    meta = encode_metadata(metadata)
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION), struct.pack("<Q", len(meta)), meta, struct.pack("<I", len(tensors))]
    for name, array in tensors.items():
        values = np.asarray(array, dtype="<f8", order="C")
        name_bytes = name.encode("utf-8")
        parts.append(struct.pack("<I", len(name_bytes)))
        parts.append(name_bytes)
        parts.append(struct.pack("<I", values.ndim))
        parts.append(struct.pack(f"<{values.ndim}I", *values.shape))
        parts.append(values.tobytes(order="C"))
    return b"".join(parts)


class _Reader:
    def __init__(self, payload: bytes, path: Optional[str]):
        self.payload = payload
        self.offset = 0
        self.path = path

    def take(self, size: int, what: str) -> bytes:
        end = self.offset + size
        if end > len(self.payload):
            raise CheckpointCorruptionException(
                f"Truncated checkpoint while reading {what}: need {size} bytes, {len(self.payload) - self.offset} left",
                self.path, self.offset
            )
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]


def decode_checkpoint(payload: bytes, path: Optional[str] = None) -> Checkpoint:
    """
    Raises:
        CheckpointCorruptionException: On bad magic, unsupported version, malformed
            metadata, truncation or trailing bytes
    """
    reader = _Reader(payload, path)
    magic = reader.take(len(MAGIC), "magic")
    if magic != MAGIC:
        raise CheckpointCorruptionException(f"Bad magic {magic!r}, expected \"PMOE\"", path, 0)
    version = reader.u32("version")
    if version != FORMAT_VERSION:
        raise CheckpointCorruptionException(f"Unsupported checkpoint version {version}, expected {FORMAT_VERSION}", path, 4)

    meta_length = reader.u64("metadata length")
    meta_bytes = reader.take(meta_length, "metadata")
    try:
        metadata: Dict[str, Any] = json.loads(meta_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointCorruptionException(f"Metadata is not valid UTF-8 JSON: {e}", path, 16) from e
    if not isinstance(metadata, dict):
        raise CheckpointCorruptionException("Metadata must be a JSON object", path, 16)

    tensors: Dict[str, np.ndarray] = {}
    for _ in range(reader.u32("tensor count")):
        name_bytes = reader.take(reader.u32("name length"), "tensor name")
        try:
            name = name_bytes.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointCorruptionException("Tensor name is not valid UTF-8", path, reader.offset) from e
        rank = reader.u32(f"rank of {name}")
        dims = struct.unpack(f"<{rank}I", reader.take(4 * rank, f"dims of {name}"))
        count = math.prod(dims)
        if 8 * count > len(payload) - reader.offset:
            raise CheckpointCorruptionException(
                f"Tensor {name} declares {count} values, more than the {len(payload) - reader.offset} bytes left",
                path, reader.offset
            )
        values = np.frombuffer(reader.take(8 * count, f"values of {name}"), dtype="<f8")
        tensors[name] = values.astype(np.float64).reshape(dims)

    if reader.offset != len(payload):
        raise CheckpointCorruptionException(
            f"{len(payload) - reader.offset} trailing bytes after the last tensor", path, reader.offset
        )
    return Checkpoint(version=version, metadata=metadata, tensors=tensors)

"""Portable checkpoint directory: manifest.json + tensors.bin.

The manifest records the ordered tensor names and shapes, the payload
dtype (always little-endian float32), a sha256 of the payload, a format
version, and an arbitrary JSON metadata object supplied by the caller
(training counters, network config and the like).  tensors.bin is the
concatenation of all tensors, C-order, in manifest order.  Loading
verifies version, digest and per-tensor sizes, so corruption and schema
drift surface as explicit errors instead of silently wrong weights.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


def write_tensors(out_dir, named_tensors: dict, meta: dict) -> None:
    """Write {name: float32 array} plus metadata as a checkpoint directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    chunks = []
    for name, tensor in named_tensors.items():
        # ascontiguousarray alone would promote 0-d arrays to 1-d
        arr = np.asarray(tensor, dtype="<f4")
        if not arr.flags.c_contiguous:
            arr = np.ascontiguousarray(arr)
        records.append({"name": name, "shape": list(arr.shape)})
        chunks.append(arr.tobytes())
    payload = b"".join(chunks)
    manifest = {
        "version": FORMAT_VERSION,
        "dtype": "f32",
        "tensors": records,
        "sha256": hashlib.sha256(payload).hexdigest(),
        "meta": meta,
    }
    (out_dir / "tensors.bin").write_bytes(payload)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))


def read_tensors(in_dir):
    """Load a checkpoint directory back into ({name: array}, meta)."""
    in_dir = Path(in_dir)
    manifest_path = in_dir / "manifest.json"
    if not manifest_path.exists():
        raise ValueError(f"{in_dir} is not a checkpoint directory (no manifest.json)")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("version") != FORMAT_VERSION:
        raise ValueError(
            f"unsupported checkpoint version {manifest.get('version')}, "
            f"expected {FORMAT_VERSION}"
        )
    payload = (in_dir / "tensors.bin").read_bytes()
    if hashlib.sha256(payload).hexdigest() != manifest["sha256"]:
        raise ValueError("tensors.bin digest mismatch, checkpoint corrupted")
    named = {}
    offset = 0
    for record in manifest["tensors"]:
        shape = tuple(record["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 4
        if offset + nbytes > len(payload):
            raise ValueError(f"tensor {record['name']} missing from tensors.bin")
        named[record["name"]] = np.frombuffer(
            payload, dtype="<f4", count=nbytes // 4, offset=offset
        ).reshape(shape).copy()
        offset += nbytes
    if offset != len(payload):
        raise ValueError("tensors.bin holds trailing bytes not listed in the manifest")
    return named, manifest["meta"]

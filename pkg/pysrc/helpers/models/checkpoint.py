"""
Checkpoint file: 8-byte little-endian header length, UTF-8 JSON header, then
little-endian float64 blobs in header order (parameters first, then optimizer
moments).
"""
from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from pysrc.errors import DataError
from pysrc.helpers.models.base import RecModel

FORMAT_TAG = "hyprec-checkpoint"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    header: Dict[str, Any]
    params: Dict[str, np.ndarray]
    optimizer_arrays: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def model_header(self) -> Dict[str, Any]:
        return self.header["model"]

    @property
    def epoch(self) -> int:
        return int(self.header.get("epoch", 0))


def _blob_entries(arrays: Dict[str, np.ndarray]) -> List[Dict[str, Any]]:
    return [{"name": name, "shape": list(np.shape(a))} for name, a in arrays.items()]


def save_checkpoint(
    path: str,
    model: RecModel,
    optimizer=None,
    extra: Optional[Dict[str, Any]] = None,
) -> None:
    header: Dict[str, Any] = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "model": model.header(),
        "params": [
            {"name": name, "shape": list(p.values.shape), "space": p.space.to_dict()}
            for name, p in model.params.items()
        ],
        "optimizer": None,
    }
    opt_arrays: Dict[str, np.ndarray] = {}
    if optimizer is not None:
        opt_arrays = optimizer.state_arrays()
        header["optimizer"] = {
            "config": optimizer.config.to_dict(),
            "t": optimizer.t,
            "blobs": _blob_entries(opt_arrays),
        }
    header.update(extra or {})

    raw_header = json.dumps(header, sort_keys=True).encode("utf-8")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = path + ".tmp"
    with open(tmp_path, "wb") as f:
        f.write(struct.pack("<Q", len(raw_header)))
        f.write(raw_header)
        for p in model.params.values():
            f.write(np.ascontiguousarray(p.values, dtype="<f8").tobytes())
        for a in opt_arrays.values():
            f.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    os.replace(tmp_path, path)


def load_checkpoint(path: str) -> Checkpoint:
    if not os.path.isfile(path):
        raise DataError(f"Checkpoint not found: {path}")
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 8:
        raise DataError(f"Truncated checkpoint: {path}")
    (header_len,) = struct.unpack("<Q", raw[:8])
    try:
        header = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise DataError(f"Unreadable checkpoint header in {path}: {e}")
    if header.get("format") != FORMAT_TAG:
        raise DataError(f"{path} is not a checkpoint file.")

    offset = 8 + header_len

    def take(entries) -> Dict[str, np.ndarray]:
        nonlocal offset
        out: Dict[str, np.ndarray] = {}
        for entry in entries:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            end = offset + 8 * count
            if end > len(raw):
                raise DataError(f"Checkpoint {path} is shorter than its header declares.")
            out[entry["name"]] = np.frombuffer(raw[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
            offset = end
        return out

    params = take(header["params"])
    opt = take(header["optimizer"]["blobs"]) if header.get("optimizer") else {}
    return Checkpoint(header=header, params=params, optimizer_arrays=opt)

"""Sidecar records: the file contract consumed by the classification core.

One JSON file per image, named `<image-stem>.feat.json`, holding the 8
emotion logits, the 2048 appearance values, the 1000 semantic logits, an
integer face count, and the extractor version. Floats are truncated to
32-bit before serialization; writes are atomic (temp file then rename).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

EMOTION_DIM = 8
APPEARANCE_DIM = 2048
SEMANTIC_DIM = 1000
SIDECAR_SUFFIX = ".feat.json"


class SidecarContractError(Exception):
    """The record violates the sidecar schema; refused before writing."""


@dataclass(frozen=True)
class SidecarRecord:
    emotion: np.ndarray     # 8 float32
    appearance: np.ndarray  # 2048 float32
    semantic: np.ndarray    # 1000 float32
    faces: int
    extractor_version: str

    def __post_init__(self):
        for name, arr, dim in (("emotion", self.emotion, EMOTION_DIM),
                               ("appearance", self.appearance, APPEARANCE_DIM),
                               ("semantic", self.semantic, SEMANTIC_DIM)):
            if arr.shape != (dim,):
                raise SidecarContractError(
                    f"block {name!r} has {int(np.prod(arr.shape))} values, expected {dim}")
            if not np.all(np.isfinite(arr)):
                raise SidecarContractError(f"non-finite value in block {name!r}")
        if self.faces < 0:
            raise SidecarContractError("face count must be >= 0")


def sidecar_path_for(image_path, out_dir) -> Path:
    return Path(out_dir) / f"{Path(image_path).stem}{SIDECAR_SUFFIX}"


def write_sidecar(record: SidecarRecord, out_dir, image_path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = sidecar_path_for(image_path, out_dir)
    payload = {
        "emotion": [float(v) for v in record.emotion.astype(np.float32)],
        "appearance": [float(v) for v in record.appearance.astype(np.float32)],
        "semantic": [float(v) for v in record.semantic.astype(np.float32)],
        "faces": int(record.faces),
        "extractor_version": record.extractor_version,
    }
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload), encoding="utf-8")
    tmp.replace(path)
    return path

"""Vector extraction: one forward pass per image, plus the face count."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .faces import count_faces
from .model import ExtractorModel
from .preprocess import extraction_tensor
from .sidecar import SidecarRecord, write_sidecar

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}


def extract_image_vectors(model: ExtractorModel, image_path):
    """(emotion logits R^8, appearance R^2048, semantic logits R^1000)."""
    model.eval()
    tensor = extraction_tensor(image_path).unsqueeze(0)
    with torch.no_grad():
        emotion, appearance, semantic = model(tensor)
    return (emotion.squeeze(0).numpy().astype(np.float32),
            appearance.squeeze(0).numpy().astype(np.float32),
            semantic.squeeze(0).numpy().astype(np.float32))


def extract_to_sidecar(model: ExtractorModel, image_path, out_dir,
                       version: str = "0.1.0", detector=None) -> Path:
    emotion, appearance, semantic = extract_image_vectors(model, image_path)
    faces = count_faces(image_path, detector=detector)
    record = SidecarRecord(emotion=emotion, appearance=appearance,
                           semantic=semantic, faces=faces,
                           extractor_version=version)
    return write_sidecar(record, out_dir, image_path)


def iter_image_files(images_dir):
    images_dir = Path(images_dir)
    return sorted(p for p in images_dir.iterdir()
                  if p.suffix.lower() in _IMAGE_SUFFIXES)


def extract_directory(model: ExtractorModel, images_dir, out_dir,
                      version: str = "0.1.0", detector=None) -> list[Path]:
    return [extract_to_sidecar(model, image, out_dir, version, detector)
            for image in iter_image_files(images_dir)]

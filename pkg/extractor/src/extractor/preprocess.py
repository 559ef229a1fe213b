"""Image preprocessing shared by fine-tuning and extraction.

Extraction: resize so the shortest side is 256 pixels, central 224x224x3
crop, per-channel standardization with the backbone's training statistics.
Fine-tuning additionally uses random 224x224 crops of 256x256 images.
Grayscale and alpha images are converted to 3 channels.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

CROP_SIZE = 224
RESIZE_SHORTEST = 256

# ImageNet training statistics, per channel.
CHANNEL_MEAN = (0.485, 0.456, 0.406)
CHANNEL_STD = (0.229, 0.224, 0.225)


class UndecodableImageError(Exception):
    pass


def load_rgb(path) -> Image.Image:
    try:
        image = Image.open(Path(path))
        return image.convert("RGB")  # replicates grayscale, drops alpha
    except Exception as exc:
        raise UndecodableImageError(f"cannot decode image {path}: {exc}") from exc


def to_standardized_tensor(image: Image.Image) -> torch.Tensor:
    arr = np.asarray(image, dtype=np.float32) / 255.0
    tensor = torch.from_numpy(arr).permute(2, 0, 1)
    mean = torch.tensor(CHANNEL_MEAN).view(3, 1, 1)
    std = torch.tensor(CHANNEL_STD).view(3, 1, 1)
    return (tensor - mean) / std


def resize_shortest_side(image: Image.Image, target: int = RESIZE_SHORTEST) -> Image.Image:
    w, h = image.size
    if w <= h:
        new_w, new_h = target, max(target, round(h * target / w))
    else:
        new_w, new_h = max(target, round(w * target / h)), target
    return image.resize((new_w, new_h), Image.BILINEAR)


def central_crop(tensor: torch.Tensor, size: int = CROP_SIZE) -> torch.Tensor:
    _, h, w = tensor.shape
    top = (h - size) // 2
    left = (w - size) // 2
    return tensor[:, top:top + size, left:left + size]


def extraction_tensor(path) -> torch.Tensor:
    """The deterministic inference preprocessing for one image file."""
    image = resize_shortest_side(load_rgb(path))
    return central_crop(to_standardized_tensor(image))


def training_image_tensor(path) -> torch.Tensor:
    """256x256 standardized tensor; random cropping happens per epoch."""
    image = load_rgb(path).resize((RESIZE_SHORTEST, RESIZE_SHORTEST), Image.BILINEAR)
    return to_standardized_tensor(image)


def random_crop(tensor: torch.Tensor, generator: torch.Generator,
                size: int = CROP_SIZE) -> torch.Tensor:
    _, h, w = tensor.shape
    top = int(torch.randint(0, h - size + 1, (1,), generator=generator))
    left = int(torch.randint(0, w - size + 1, (1,), generator=generator))
    return tensor[:, top:top + size, left:left + size]

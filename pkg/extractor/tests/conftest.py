"""Session fixtures: seeded backbone checkpoint and the 80-image smoke set."""

from __future__ import annotations

import numpy as np
import pytest
import torch
from PIL import Image

from extractor.finetune import FineTuneRecipe, fine_tune_emotion_head
from extractor.model import EMOTION_CATEGORIES, ExtractorModel, save_backbone_checkpoint

SMOKE_SEED = 1234


@pytest.fixture(scope="session")
def backbone_path(tmp_path_factory):
    """A seeded random-weight 152-layer backbone standing in for the
    pretrained checkpoint (real pretrained weights need network access)."""
    torch.manual_seed(991)
    model = ExtractorModel()
    path = tmp_path_factory.mktemp("backbone") / "backbone.pt"
    save_backbone_checkpoint(model.backbone, path)
    return path


@pytest.fixture(scope="session")
def smoke_dataset(tmp_path_factory):
    """80 synthetic images, 10 per emotion class, folder-per-class layout.

    Each class gets a distinct mean color plus seeded noise so the head has
    a learnable (if crude) signal.
    """
    root = tmp_path_factory.mktemp("fi_smoke")
    rng = np.random.default_rng(20240601)
    for c, name in enumerate(EMOTION_CATEGORIES):
        class_dir = root / name
        class_dir.mkdir()
        base = rng.integers(30, 220, size=3)
        for i in range(10):
            noise = rng.integers(0, 60, size=(256, 256, 3))
            img = np.clip(base[None, None, :] + noise, 0, 255).astype(np.uint8)
            Image.fromarray(img).save(class_dir / f"{name}_{i:02d}.png")
    return root


@pytest.fixture(scope="session")
def smoke_finetune(backbone_path, smoke_dataset):
    """The 3-epoch smoke fine-tune shared by the freeze/schedule/loss tests."""
    return fine_tune_emotion_head(smoke_dataset, backbone_path, seed=SMOKE_SEED,
                                  recipe=FineTuneRecipe(), epochs_override=3)

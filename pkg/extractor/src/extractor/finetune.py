"""Emotion-head fine-tuning with the fixed recipe.

100 epochs of SGD (initial lr 0.1, momentum 0.9, batch 128), learning rate
multiplied by 0.1 at epochs 30, 60 and 90, negative log-likelihood loss,
90/10 train/validation split, random 224x224 crops of 256x256 standardized
images. All layers except the replaced 8-way classification head stay
frozen. Epoch overrides exist for smoke tests only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import torch
from torch import nn
from torch.nn import functional as F

from .model import EMOTION_CATEGORIES, ExtractorModel, load_backbone_state
from .preprocess import central_crop, random_crop, training_image_tensor

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp"}


@dataclass(frozen=True)
class FineTuneRecipe:
    epochs: int = 100
    initial_lr: float = 0.1
    momentum: float = 0.9
    batch_size: int = 128
    lr_drop_epochs: tuple[int, ...] = (30, 60, 90)
    lr_drop_factor: float = 0.1
    train_fraction: float = 0.9


@dataclass
class FineTuneResult:
    checkpoint: ExtractorModel
    validation_accuracy: float
    epoch_losses: list[float] = field(default_factory=list)
    epoch_lrs: list[float] = field(default_factory=list)


class DatasetLayoutError(Exception):
    """The image folder does not follow the folder-per-class layout."""


def lr_schedule(recipe: FineTuneRecipe, epoch: int) -> float:
    """Learning rate for a 1-based epoch: 0.1 in [1,30), 0.01 in [30,60),
    0.001 in [60,90), 0.0001 from epoch 90 on."""
    drops = sum(1 for m in recipe.lr_drop_epochs if epoch >= m)
    return recipe.initial_lr * (recipe.lr_drop_factor ** drops)


def discover_dataset(data_dir) -> list[tuple[Path, int]]:
    """(image path, class index) pairs from a folder-per-class layout."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DatasetLayoutError(f"dataset directory not found: {data_dir}")
    pairs: list[tuple[Path, int]] = []
    class_index = {name: i for i, name in enumerate(EMOTION_CATEGORIES)}
    for sub in sorted(p for p in data_dir.iterdir() if p.is_dir()):
        if sub.name not in class_index:
            raise DatasetLayoutError(
                f"folder {sub.name!r} is not one of the 8 emotion classes")
        for image in sorted(sub.iterdir()):
            if image.suffix.lower() in _IMAGE_SUFFIXES:
                pairs.append((image, class_index[sub.name]))
    if not pairs:
        raise DatasetLayoutError(f"no class-labeled images under {data_dir}")
    return pairs


def fine_tune_emotion_head(
    data_dir,
    backbone_path,
    seed: int,
    recipe: FineTuneRecipe | None = None,
    epochs_override: int | None = None,
) -> FineTuneResult:
    """Train the 8-way head on pooled backbone features; trunk frozen.

    Deterministic given (data, backbone, seed). Returns the fine-tuned
    model, its validation accuracy, and the per-epoch loss and learning
    rate logs.
    """
    recipe = recipe or FineTuneRecipe()
    epochs = epochs_override if epochs_override is not None else recipe.epochs

    model = ExtractorModel()
    model.backbone.load_state_dict(load_backbone_state(backbone_path))
    model.freeze_backbone()

    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        head = nn.Linear(model.emotion_head.in_features,
                         model.emotion_head.out_features)
        bound = 1.0 / (head.in_features ** 0.5)
        head.weight.uniform_(-bound, bound, generator=generator)
        head.bias.uniform_(-bound, bound, generator=generator)
        model.emotion_head.load_state_dict(head.state_dict())

    pairs = discover_dataset(data_dir)
    order = torch.randperm(len(pairs), generator=generator).tolist()
    n_train = max(1, int(round(recipe.train_fraction * len(pairs))))
    if n_train == len(pairs):
        n_train = len(pairs) - 1
    train_pairs = [pairs[i] for i in order[:n_train]]
    val_pairs = [pairs[i] for i in order[n_train:]]

    # 256x256 standardized tensors, loaded once; crops vary per epoch.
    train_images = torch.stack([training_image_tensor(p) for p, _ in train_pairs])
    train_labels = torch.tensor([c for _, c in train_pairs])
    val_images = torch.stack([central_crop(training_image_tensor(p))
                              for p, _ in val_pairs])
    val_labels = torch.tensor([c for _, c in val_pairs])

    optimizer = torch.optim.SGD(model.emotion_head.parameters(),
                                lr=recipe.initial_lr, momentum=recipe.momentum)
    losses: list[float] = []
    lrs: list[float] = []
    for epoch in range(1, epochs + 1):
        lr = lr_schedule(recipe, epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr
        lrs.append(lr)

        perm = torch.randperm(len(train_pairs), generator=generator)
        epoch_loss = 0.0
        for start in range(0, len(perm), recipe.batch_size):
            batch_idx = perm[start:start + recipe.batch_size]
            crops = torch.stack([random_crop(train_images[i], generator)
                                 for i in batch_idx.tolist()])
            with torch.no_grad():
                features = model.pooled_features(crops)
            logits = model.emotion_head(features)
            loss = F.nll_loss(F.log_softmax(logits, dim=1), train_labels[batch_idx])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss) * len(batch_idx)
        losses.append(epoch_loss / len(train_pairs))

    model.eval()
    with torch.no_grad():
        features = model.pooled_features(val_images)
        predicted = model.emotion_head(features).argmax(dim=1)
        accuracy = float((predicted == val_labels).float().mean())
    return FineTuneResult(model, accuracy, losses, lrs)

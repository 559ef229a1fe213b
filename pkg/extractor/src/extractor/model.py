"""152-layer residual backbone with two output heads.

The backbone keeps its original 1000-way classification layer (semantic
logits) and gains a separate 8-way emotion head on the pooled penultimate
features. Checkpoints carry both, so one forward pass yields emotion
logits, the 2048-dim appearance vector, and the semantic logits.
"""

from __future__ import annotations

from pathlib import Path

import torch
from torch import nn
from torchvision.models import resnet152

EMOTION_CATEGORIES = ("amusement", "anger", "awe", "contentment",
                      "disgust", "excitement", "fear", "sadness")
APPEARANCE_DIM = 2048
SEMANTIC_DIM = 1000
CHECKPOINT_FORMAT = 1


class MissingBackboneError(Exception):
    """The pretrained backbone weights are absent or unreadable."""


class ExtractorModel(nn.Module):
    def __init__(self):
        super().__init__()
        self.backbone = resnet152(weights=None)
        self.emotion_head = nn.Linear(APPEARANCE_DIM, len(EMOTION_CATEGORIES))

    def pooled_features(self, x: torch.Tensor) -> torch.Tensor:
        """Penultimate-layer (post-pool) features, shape (N, 2048)."""
        b = self.backbone
        x = b.conv1(x)
        x = b.bn1(x)
        x = b.relu(x)
        x = b.maxpool(x)
        x = b.layer1(x)
        x = b.layer2(x)
        x = b.layer3(x)
        x = b.layer4(x)
        x = b.avgpool(x)
        return torch.flatten(x, 1)

    def forward(self, x: torch.Tensor):
        appearance = self.pooled_features(x)
        semantic = self.backbone.fc(appearance)
        emotion = self.emotion_head(appearance)
        return emotion, appearance, semantic

    def freeze_backbone(self) -> None:
        """Freeze every parameter except the emotion head; the backbone also
        stays in eval mode so batch-norm running statistics never move."""
        for param in self.backbone.parameters():
            param.requires_grad_(False)
        self.backbone.eval()

    def train(self, mode: bool = True):  # keep the frozen trunk in eval
        super().train(mode)
        if not any(p.requires_grad for p in self.backbone.parameters()):
            self.backbone.eval()
        return self


def save_backbone_checkpoint(model_or_state, path) -> Path:
    """Plain backbone weights (the 'pretrained 152-layer backbone' input)."""
    state = (model_or_state.state_dict()
             if isinstance(model_or_state, nn.Module) else model_or_state)
    path = Path(path)
    torch.save({"format": CHECKPOINT_FORMAT, "backbone": state}, path)
    return path


def save_checkpoint(model: ExtractorModel, path, version: str = "0.1.0") -> Path:
    path = Path(path)
    torch.save({
        "format": CHECKPOINT_FORMAT,
        "backbone": model.backbone.state_dict(),
        "emotion_head": model.emotion_head.state_dict(),
        "extractor_version": version,
    }, path)
    return path


def load_backbone_state(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingBackboneError(f"backbone checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if isinstance(payload, dict) and "backbone" in payload:
        return payload["backbone"]
    if isinstance(payload, dict) and "conv1.weight" in payload:
        return payload  # raw torchvision state dict
    raise MissingBackboneError(f"unrecognized backbone checkpoint format: {path}")


def load_checkpoint(path) -> tuple[ExtractorModel, str]:
    path = Path(path)
    if not path.exists():
        raise MissingBackboneError(f"model checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if payload.get("format") != CHECKPOINT_FORMAT or "emotion_head" not in payload:
        raise MissingBackboneError(f"not a fine-tuned extractor checkpoint: {path}")
    model = ExtractorModel()
    model.backbone.load_state_dict(payload["backbone"])
    model.emotion_head.load_state_dict(payload["emotion_head"])
    model.eval()
    return model, str(payload.get("extractor_version", "unknown"))

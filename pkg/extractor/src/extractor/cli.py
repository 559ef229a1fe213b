"""CLI: extract sidecars, fine-tune the emotion head, count faces."""

from __future__ import annotations

from pathlib import Path

import click

from . import __version__
from .extract import extract_directory, iter_image_files
from .faces import count_faces
from .finetune import FineTuneRecipe, fine_tune_emotion_head
from .model import load_checkpoint, save_checkpoint


@click.group()
@click.version_option(version=__version__)
def main():
    """Per-image feature extraction for the fraud-classification toolkit."""


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), required=True,
              help="fine-tuned extractor checkpoint")
@click.option("--images", "images_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def extract(model_path, images_dir, out_dir):
    """Write one sidecar per image in --images."""
    model, version = load_checkpoint(model_path)
    written = extract_directory(model, images_dir, out_dir, version=version)
    click.echo(f"wrote {len(written)} sidecars to {out_dir}")


@main.command()
@click.option("--data", "data_dir", type=click.Path(exists=True), required=True,
              help="folder-per-class image dataset (8 emotion classes)")
@click.option("--backbone", "backbone_path", type=click.Path(exists=True), required=True,
              help="pretrained 152-layer backbone checkpoint")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epochs-override", type=int, default=None,
              help="smoke-test override of the 100-epoch recipe")
@click.option("--out", "out_path", type=click.Path(), required=True)
def finetune(data_dir, backbone_path, seed, epochs_override, out_path):
    """Fine-tune the 8-way emotion head; all other layers stay frozen."""
    result = fine_tune_emotion_head(data_dir, backbone_path, seed,
                                    FineTuneRecipe(), epochs_override)
    save_checkpoint(result.checkpoint, out_path)
    click.echo(f"validation accuracy: {result.validation_accuracy:.4f}")
    click.echo(f"checkpoint: {out_path}")


@main.command()
@click.option("--images", "images_dir", type=click.Path(exists=True), required=True)
def faces(images_dir):
    """Print the face count for every image in --images."""
    for image in iter_image_files(images_dir):
        click.echo(f"{image.name}\t{count_faces(image)}")


if __name__ == "__main__":
    main()

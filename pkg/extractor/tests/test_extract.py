"""Vector extraction: dimensions, determinism, preprocessing edge cases."""

from __future__ import annotations

import numpy as np
import pytest
import torch
from PIL import Image

from extractor.extract import extract_image_vectors
from extractor.model import ExtractorModel, load_checkpoint, save_checkpoint
from extractor.preprocess import (UndecodableImageError, extraction_tensor,
                                  resize_shortest_side)


@pytest.fixture(scope="module")
def model(smoke_finetune):
    return smoke_finetune.checkpoint


@pytest.fixture(scope="module")
def photo(tmp_path_factory):
    rng = np.random.default_rng(7)
    path = tmp_path_factory.mktemp("imgs") / "photo.png"
    Image.fromarray(rng.integers(0, 255, (300, 420, 3), dtype=np.uint8)).save(path)
    return path


class TestExtraction:
    def test_output_dimensions_exact(self, model, photo):
        emotion, appearance, semantic = extract_image_vectors(model, photo)
        assert emotion.shape == (8,)
        assert appearance.shape == (2048,)
        assert semantic.shape == (1000,)

    def test_same_image_twice_is_identical(self, model, photo):
        first = extract_image_vectors(model, photo)
        second = extract_image_vectors(model, photo)
        for a, b in zip(first, second):
            assert (a == b).all()

    def test_uniform_gray_differs_from_textured_photo(self, model, photo, tmp_path):
        gray_path = tmp_path / "gray.png"
        Image.fromarray(np.full((256, 256, 3), 128, dtype=np.uint8)).save(gray_path)
        _, app_photo, _ = extract_image_vectors(model, photo)
        _, app_gray, _ = extract_image_vectors(model, gray_path)
        assert float(np.linalg.norm(app_photo - app_gray)) > 0.0

    def test_grayscale_image_handled_by_replication(self, model, tmp_path):
        path = tmp_path / "mono.png"
        Image.fromarray(np.random.default_rng(1).integers(
            0, 255, (256, 256), dtype=np.uint8), mode="L").save(path)
        emotion, appearance, semantic = extract_image_vectors(model, path)
        assert np.isfinite(appearance).all()

    def test_undecodable_image_rejected(self, model, tmp_path):
        bad = tmp_path / "broken.png"
        bad.write_bytes(b"this is not an image")
        with pytest.raises(UndecodableImageError):
            extract_image_vectors(model, bad)


class TestPreprocess:
    def test_shortest_side_lands_on_256(self):
        wide = Image.new("RGB", (1000, 400))
        tall = Image.new("RGB", (300, 900))
        assert resize_shortest_side(wide).size[1] == 256
        assert resize_shortest_side(tall).size[0] == 256

    def test_extraction_tensor_is_224_crop(self, photo):
        tensor = extraction_tensor(photo)
        assert tuple(tensor.shape) == (3, 224, 224)


class TestCheckpointRoundTrip:
    def test_save_load_preserves_outputs(self, model, photo, tmp_path):
        path = save_checkpoint(model, tmp_path / "tuned.pt", version="t1")
        loaded, version = load_checkpoint(path)
        assert version == "t1"
        before = extract_image_vectors(model, photo)
        after = extract_image_vectors(loaded, photo)
        for a, b in zip(before, after):
            assert (a == b).all()

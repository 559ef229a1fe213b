"""CLI smoke: finetune -> extract -> faces, wired through real files."""

from __future__ import annotations

import numpy as np
import pytest
from click.testing import CliRunner
from PIL import Image

from extractor.cli import main
from extractor.model import save_checkpoint


def _run(args):
    runner = CliRunner()
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture(scope="module")
def image_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_imgs")
    rng = np.random.default_rng(3)
    for i in range(2):
        Image.fromarray(rng.integers(0, 255, (256, 256, 3), dtype=np.uint8)
                        ).save(root / f"img{i}.png")
    return root


class TestCli:
    def test_finetune_then_extract(self, smoke_dataset, backbone_path,
                                   image_dir, tmp_path):
        ckpt = tmp_path / "tuned.pt"
        result = _run(["finetune", "--data", str(smoke_dataset),
                       "--backbone", str(backbone_path), "--seed", "5",
                       "--epochs-override", "1", "--out", str(ckpt)])
        assert "validation accuracy" in result.output
        assert ckpt.exists()

        out = tmp_path / "sidecars"
        result = _run(["extract", "--model", str(ckpt),
                       "--images", str(image_dir), "--out", str(out)])
        assert "wrote 2 sidecars" in result.output
        assert sorted(p.name for p in out.iterdir()) == ["img0.feat.json",
                                                         "img1.feat.json"]

        from cfdetect.imagefeat import load_sidecar

        loaded = load_sidecar(out / "img0.feat.json")
        assert loaded.appearance.shape == (2048,)

    def test_faces_command(self, image_dir):
        result = _run(["faces", "--images", str(image_dir)])
        lines = result.output.strip().splitlines()
        assert len(lines) == 2
        for line in lines:
            name, count = line.split("\t")
            assert int(count) >= 0

"""Export adapter: manifest handling, record emission, and failure modes."""

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from export_adapter import ExportError, export_records
from export_adapter.cli import main

STUB_CLF = "export_adapter.stub_models:build_classifier"
STUB_AE = "export_adapter.stub_models:build_autoencoder"


def _write_manifest(tmp_path, **over):
    manifest = {
        "image_dir": str(tmp_path / "images"),
        "label_map": str(tmp_path / "labels.json"),
        "classifier": STUB_CLF,
        "autoencoder": STUB_AE,
        "output": str(tmp_path / "records.jsonl"),
    }
    manifest.update(over)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


def _make_images(tmp_path, values):
    img_dir = tmp_path / "images"
    img_dir.mkdir(exist_ok=True)
    for name, v in values.items():
        Image.fromarray(np.full((6, 6, 3), v, dtype=np.uint8)).save(img_dir / name)
    return img_dir


def _read_lines(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines()]


class TestExport:
    def test_empty_folder_yields_empty_file(self, tmp_path):
        (tmp_path / "images").mkdir()
        (tmp_path / "labels.json").write_text("{}")
        result = export_records(_write_manifest(tmp_path))
        assert result.written == 0 and result.skipped == 0
        assert (tmp_path / "records.jsonl").read_text() == ""

    def test_three_image_fixture(self, tmp_path):
        _make_images(tmp_path, {"b.png": 120, "a.png": 30, "c.png": 220})
        (tmp_path / "labels.json").write_text(
            json.dumps({"a.png": 0, "b.png": 1, "c.png": None})
        )
        result = export_records(_write_manifest(tmp_path))
        assert result.written == 3 and result.skipped == 0
        records = _read_lines(tmp_path / "records.jsonl")
        # deterministic filename ordering
        assert [r["id"] for r in records] == ["a.png", "b.png", "c.png"]
        for r in records:
            assert set(r) == {"id", "split", "label", "ood", "pred_probs",
                              "logits", "features", "recon_loss"}
            assert abs(sum(r["pred_probs"]) - 1.0) <= 1e-6
            assert r["recon_loss"] >= 0.0
            assert len(r["features"]) == 3
        assert records[0]["label"] == 0 and not records[0]["ood"]
        assert records[2]["label"] is None and records[2]["ood"]

    def test_constant_image_has_zero_recon_loss(self, tmp_path):
        _make_images(tmp_path, {"a.png": 77})
        (tmp_path / "labels.json").write_text(json.dumps({"a.png": 0}))
        export_records(_write_manifest(tmp_path))
        (record,) = _read_lines(tmp_path / "records.jsonl")
        assert record["recon_loss"] == pytest.approx(0.0, abs=1e-12)

    def test_batching_does_not_change_output(self, tmp_path):
        _make_images(tmp_path, {f"{i:02d}.png": 20 * i for i in range(5)})
        (tmp_path / "labels.json").write_text(
            json.dumps({f"{i:02d}.png": i % 2 for i in range(5)})
        )
        export_records(_write_manifest(tmp_path, batch_size=2))
        batched = (tmp_path / "records.jsonl").read_bytes()
        export_records(_write_manifest(tmp_path, batch_size=64))
        assert (tmp_path / "records.jsonl").read_bytes() == batched

    def test_undecodable_image_skipped_with_warning(self, tmp_path):
        _make_images(tmp_path, {"a.png": 40})
        (tmp_path / "images" / "broken.png").write_bytes(b"this is not a png")
        (tmp_path / "labels.json").write_text(
            json.dumps({"a.png": 0, "broken.png": 1})
        )
        with pytest.warns(UserWarning, match="broken.png"):
            result = export_records(_write_manifest(tmp_path))
        assert result.written == 1 and result.skipped == 1
        assert [r["id"] for r in _read_lines(tmp_path / "records.jsonl")] == ["a.png"]


class TestFailures:
    def test_model_load_failure_aborts(self, tmp_path):
        _make_images(tmp_path, {"a.png": 40})
        (tmp_path / "labels.json").write_text(json.dumps({"a.png": 0}))
        manifest = _write_manifest(tmp_path, classifier="no.such.module:build")
        with pytest.raises(ExportError, match="classifier"):
            export_records(manifest)

    def test_missing_label_entry_aborts(self, tmp_path):
        _make_images(tmp_path, {"a.png": 40})
        (tmp_path / "labels.json").write_text("{}")
        with pytest.raises(ExportError, match="a.png"):
            export_records(_write_manifest(tmp_path))

    def test_missing_manifest_key_aborts(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"image_dir": "x"}))
        with pytest.raises(ExportError, match="missing key"):
            export_records(path)

    def test_bad_manifest_json_aborts(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{broken")
        with pytest.raises(ExportError):
            export_records(path)

    def test_invalid_batch_size_aborts(self, tmp_path):
        _make_images(tmp_path, {"a.png": 40})
        (tmp_path / "labels.json").write_text(json.dumps({"a.png": 0}))
        with pytest.raises(ExportError, match="batch_size"):
            export_records(_write_manifest(tmp_path, batch_size=0))


class TestCli:
    def test_success_exit_code(self, tmp_path, capsys):
        _make_images(tmp_path, {"a.png": 40})
        (tmp_path / "labels.json").write_text(json.dumps({"a.png": 0}))
        assert main([str(_write_manifest(tmp_path))]) == 0
        assert "wrote 1 record(s)" in capsys.readouterr().out

    def test_failure_exit_code(self, tmp_path, capsys):
        path = tmp_path / "manifest.json"
        path.write_text("{broken")
        assert main([str(path)]) == 1
        assert "error:" in capsys.readouterr().err

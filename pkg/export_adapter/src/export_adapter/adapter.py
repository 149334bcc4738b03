"""Manifest-driven record export.

The manifest is a JSON file:

    {
      "image_dir":   "path/to/images",
      "label_map":   "path/to/labels.json",   # {filename: class index or null}
      "classifier":  "package.module:builder",
      "autoencoder": "package.module:builder",
      "batch_size":  32,
      "output":      "path/to/records.jsonl",
      "split":       "test"                    # optional, default "test"
    }

`classifier` and `autoencoder` name zero-argument callables (``module:attr``)
that return model objects:

* the classifier must expose ``logits(batch) -> (B, C)`` and
  ``features(batch) -> (B, F)`` (penultimate-layer features);
* the autoencoder must expose ``reconstruct(batch) -> (B, H, W, 3)``.

Batches are float arrays of shape (B, H, W, 3) with values in [0, 1]. One
record is written per image, ordered by filename; an image whose label-map
entry is null is marked out-of-distribution. Undecodable images are skipped
with a warning; a model that fails to load aborts the export.
"""

import importlib
import json
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tiff", ".webp"}
PROB_SUM_TOL = 1e-6


class ExportError(Exception):
    """Manifest, label-map, or model-loading failure; aborts the export."""


@dataclass
class ExportResult:
    output: Path
    written: int
    skipped: int


def load_manifest(path):
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ExportError(f"cannot read manifest {path}: {exc}") from exc
    required = ("image_dir", "label_map", "classifier", "autoencoder", "output")
    missing = [key for key in required if key not in manifest]
    if missing:
        raise ExportError(f"manifest is missing key(s): {', '.join(missing)}")
    manifest.setdefault("batch_size", 32)
    manifest.setdefault("split", "test")
    if int(manifest["batch_size"]) < 1:
        raise ExportError("batch_size must be >= 1")
    return manifest


def _load_entry(spec, what):
    """Resolve a 'module:attr' entry point and call it to build the model."""
    if not isinstance(spec, str) or ":" not in spec:
        raise ExportError(f"{what} must be a 'module:callable' string, got {spec!r}")
    module_name, _, attr = spec.partition(":")
    try:
        module = importlib.import_module(module_name)
        builder = getattr(module, attr)
        return builder()
    except Exception as exc:
        raise ExportError(f"failed to load {what} {spec!r}: {exc}") from exc


def _load_labels(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            labels = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ExportError(f"cannot read label map {path}: {exc}") from exc
    if not isinstance(labels, dict):
        raise ExportError("label map must be a JSON object of {filename: label or null}")
    return labels


def _softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _decode(path):
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=float) / 255.0
    except (UnidentifiedImageError, OSError) as exc:
        warnings.warn(f"skipping undecodable image {path.name}: {exc}", stacklevel=2)
        return None


def _record_dict(name, split, label, probs, logits, features, recon_loss):
    total = float(probs.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ExportError(f"classifier output for {name} is not a probability vector")
    return {
        "id": name,
        "split": split,
        "label": None if label is None else int(label),
        "ood": label is None,
        "pred_probs": [float(p) for p in probs],
        "logits": [float(v) for v in logits],
        "features": [float(v) for v in features],
        "recon_loss": float(recon_loss),
    }


def export_records(manifest_path):
    """Export one record per image in the manifest's folder; returns ExportResult."""
    manifest = load_manifest(manifest_path)
    image_dir = Path(manifest["image_dir"])
    if not image_dir.is_dir():
        raise ExportError(f"image_dir {image_dir} is not a directory")
    labels = _load_labels(manifest["label_map"])
    classifier = _load_entry(manifest["classifier"], "classifier")
    autoencoder = _load_entry(manifest["autoencoder"], "autoencoder")
    split = manifest["split"]
    batch_size = int(manifest["batch_size"])

    paths = sorted(
        (p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: p.name,
    )
    unknown = [p.name for p in paths if p.name not in labels]
    if unknown:
        raise ExportError(
            f"label map has no entry (not even null) for: {', '.join(sorted(unknown))}"
        )

    decoded = []
    skipped = 0
    for path in paths:
        image = _decode(path)
        if image is None:
            skipped += 1
        else:
            decoded.append((path.name, image))

    output = Path(manifest["output"])
    output.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with open(output, "w", encoding="utf-8", newline="\n") as f:
        for start in range(0, len(decoded), batch_size):
            chunk = decoded[start : start + batch_size]
            batch = np.stack([image for _, image in chunk])
            logits = np.asarray(classifier.logits(batch), dtype=float)
            features = np.asarray(classifier.features(batch), dtype=float)
            recon = np.asarray(autoencoder.reconstruct(batch), dtype=float)
            probs = _softmax(logits)
            losses = np.mean((recon - batch) ** 2, axis=(1, 2, 3))
            for i, (name, _) in enumerate(chunk):
                record = _record_dict(
                    name, split, labels[name], probs[i], logits[i], features[i], losses[i]
                )
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
                written += 1

    if skipped:
        logger.warning("skipped %d undecodable image(s)", skipped)
    return ExportResult(output=output, written=written, skipped=skipped)

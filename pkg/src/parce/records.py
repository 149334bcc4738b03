"""JSON Lines record files: one SampleRecord per line, UTF-8, LF endings.

Numbers are serialized as shortest round-trip decimals (Python's float repr),
so write -> read is an exact identity.
"""

import json
from pathlib import Path

import numpy as np

from .errors import InvalidRecordError
from .types import SampleRecord

REQUIRED_FIELDS = ("id", "split", "label", "ood", "pred_probs", "recon_loss")
OPTIONAL_FIELDS = ("logits", "features", "segment_losses")


def record_to_dict(rec):
    out = {
        "id": rec.id,
        "split": rec.split,
        "label": rec.label,
        "ood": bool(rec.ood),
        "pred_probs": [float(p) for p in rec.pred_probs],
    }
    if rec.logits is not None:
        out["logits"] = [float(v) for v in rec.logits]
    if rec.features is not None:
        out["features"] = [float(v) for v in rec.features]
    out["recon_loss"] = float(rec.recon_loss)
    if rec.segment_losses is not None:
        out["segment_losses"] = [
            {"segment_id": int(s["segment_id"]), "loss": float(s["loss"]),
             "pixel_count": int(s["pixel_count"])}
            for s in rec.segment_losses
        ]
    return out


def record_from_dict(obj):
    if not isinstance(obj, dict):
        raise InvalidRecordError("record line must be a JSON object")
    for key in REQUIRED_FIELDS:
        if key not in obj:
            raise InvalidRecordError(f"missing required field {key!r}")
    unknown = set(obj) - set(REQUIRED_FIELDS) - set(OPTIONAL_FIELDS)
    if unknown:
        raise InvalidRecordError(f"unknown field(s) {sorted(unknown)}")
    if not isinstance(obj["id"], str):
        raise InvalidRecordError("field 'id' must be a string")
    if not isinstance(obj["ood"], bool):
        raise InvalidRecordError("field 'ood' must be a boolean")
    if obj["label"] is not None and not isinstance(obj["label"], int):
        raise InvalidRecordError("field 'label' must be an integer or null")
    if not isinstance(obj["pred_probs"], list):
        raise InvalidRecordError("field 'pred_probs' must be an array of numbers")
    segment_losses = obj.get("segment_losses")
    if segment_losses is not None:
        if not isinstance(segment_losses, list):
            raise InvalidRecordError("field 'segment_losses' must be an array")
        for entry in segment_losses:
            if not isinstance(entry, dict) or not {"segment_id", "loss", "pixel_count"} <= set(entry):
                raise InvalidRecordError(
                    "field 'segment_losses' entries need segment_id, loss and pixel_count"
                )
    return SampleRecord(
        id=obj["id"],
        split=obj["split"],
        label=obj["label"],
        ood=obj["ood"],
        pred_probs=np.asarray(obj["pred_probs"], dtype=float),
        recon_loss=obj["recon_loss"],
        logits=None if obj.get("logits") is None else np.asarray(obj["logits"], dtype=float),
        features=None if obj.get("features") is None else np.asarray(obj["features"], dtype=float),
        segment_losses=segment_losses,
    )


def read_records(path):
    """Read a JSONL record file; parse and schema errors carry the line number."""
    records = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidRecordError(f"{path}:{lineno}: parse error: {exc}") from exc
            try:
                records.append(record_from_dict(obj))
            except InvalidRecordError as exc:
                raise InvalidRecordError(f"{path}:{lineno}: {exc}") from exc
    return records


def write_records(path, records):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(json.dumps(record_to_dict(rec), ensure_ascii=False))
            f.write("\n")

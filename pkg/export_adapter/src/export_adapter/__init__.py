"""Export adapter: run user-supplied models over an image folder and emit
the competency toolkit's JSON Lines record format."""

from .adapter import ExportError, ExportResult, export_records, load_manifest

__all__ = ["ExportError", "ExportResult", "export_records", "load_manifest"]

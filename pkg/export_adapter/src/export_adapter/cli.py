"""Standalone entry point: ``parce-export <manifest.json>``."""

import argparse
import logging
import sys

from .adapter import ExportError, export_records


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = argparse.ArgumentParser(
        prog="parce-export",
        description="Run the manifest's models over an image folder and write JSONL records.",
    )
    parser.add_argument("manifest", help="path to the export manifest (JSON)")
    args = parser.parse_args(argv)
    try:
        result = export_records(args.manifest)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.written} record(s) to {result.output}"
          + (f" ({result.skipped} skipped)" if result.skipped else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())

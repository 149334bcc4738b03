"""EvalReport serialization: deterministic JSON and an aligned-column text table."""

import json

from .metrics import EvalReport, EvalRow

METRIC_COLUMNS = ("dist", "auroc", "fpr95")


def report_to_json(report, include_timing=True):
    """Deterministic JSON for an EvalReport. Timing can be excluded so reports
    are byte-identical across runs of the same config."""
    obj = {
        "methods": list(report.methods),
        "pairs": [list(p) for p in report.pairs],
        "rows": [
            {
                "method": row.method,
                "pair": list(row.pair),
                "dist": row.dist,
                "auroc": row.auroc,
                "fpr95": row.fpr95,
            }
            for row in report.rows
        ],
        "timing": [
            {"method": method, "sec_per_sample": sec} for method, sec in report.timing
        ]
        if include_timing
        else [],
    }
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def report_from_json(text):
    obj = json.loads(text)
    report = EvalReport(
        methods=list(obj["methods"]),
        pairs=[tuple(p) for p in obj["pairs"]],
        timing=[(t["method"], t["sec_per_sample"]) for t in obj.get("timing", [])],
    )
    report.rows = [
        EvalRow(
            method=r["method"],
            pair=tuple(r["pair"]),
            dist=r["dist"],
            auroc=r["auroc"],
            fpr95=r["fpr95"],
        )
        for r in obj["rows"]
    ]
    return report


def report_to_table(report):
    """Aligned text table: one row per method, (dist, auroc, fpr95) per pair."""
    pairs = list(report.pairs)
    by_key = {(row.method, row.pair): row for row in report.rows}
    timing = dict(report.timing)

    header1 = ["Method", "Time (s)"]
    header2 = ["", ""]
    for pair in pairs:
        header1 += [f"{pair[0]} vs {pair[1]}", "", ""]
        header2 += ["Dist", "AUROC", "FPR95"]

    rows = []
    for method in report.methods:
        cells = [method]
        cells.append(f"{timing[method]:.6f}" if method in timing else "-")
        for pair in pairs:
            row = by_key.get((method, tuple(pair)))
            if row is None:
                cells += ["-", "-", "-"]
            else:
                cells += [f"{row.dist:.4f}", f"{row.auroc:.4f}", f"{row.fpr95:.4f}"]
        rows.append(cells)

    table = [header1, header2] + rows
    widths = [max(len(r[i]) for r in table) for i in range(len(header1))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in table]
    return "\n".join(lines) + "\n"

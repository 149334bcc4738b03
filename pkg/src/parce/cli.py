"""Command-line surface.

Exit codes: 0 success, 1 validation/usage error, 2 runtime failure. Errors are
emitted on stderr as single-line JSON.
"""

import json
import sys
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import core
from .config import ALL_METHODS, RunConfig, load_config
from .errors import InvalidArgumentError, ParceError, PipelineStageError
from .metrics import EvalReport, ScoredGroup
from .records import read_records, write_records
from .refmodels import linear, perturb
from .regional import segmentation
from .report import report_from_json, report_to_json, report_to_table
from . import pipeline as pipe


def _load_run_config(config_path, seed, out):
    cfg = load_config(config_path) if config_path else RunConfig()
    if seed is not None:
        cfg.seed = int(seed)
    if out is not None:
        cfg.out_dir = out
    return cfg


def common_options(f):
    """--config/--seed/--out/--format, accepted by every subcommand."""
    f = click.option("--format", "fmt", type=click.Choice(["json", "table"]), default=None)(f)
    f = click.option("--out", type=click.Path(file_okay=False), default=None)(f)
    f = click.option("--seed", type=int, default=None)(f)
    f = click.option(
        "--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None
    )(f)
    return f


def _resolve(ctx, config_path, seed, out, fmt):
    """Merge subcommand-level options over the group-level ones."""
    obj = ctx.obj
    if config_path is not None:
        cfg = _load_run_config(config_path, seed, out)
    else:
        cfg = obj["config"]
        if seed is not None:
            cfg.seed = int(seed)
        if out is not None:
            cfg.out_dir = out
    if fmt is not None:
        obj["format"] = fmt
    obj["config"] = cfg
    return cfg


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "table"]), default="table")
@click.pass_context
def cli(ctx, config_path, seed, out, fmt):
    """Competency scoring toolkit: scores, maps, baselines, evaluation."""
    ctx.obj = {"config": _load_run_config(config_path, seed, out), "format": fmt}


def _save_image_png(path, image):
    arr = np.floor(np.clip(image, 0, 1) * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path, format="PNG")


@cli.command("gen-data")
@common_options
@click.pass_context
def gen_data(ctx, config_path, seed, out, fmt):
    """Generate the synthetic corpus: PNG images plus a JSONL manifest."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    corpus = pipe.build_corpus(cfg)
    root = Path(cfg.out_dir) / "corpus"
    manifest = []
    for split in ("train", "holdout", "test_id", "test_ood"):
        split_dir = root / split
        split_dir.mkdir(parents=True, exist_ok=True)
        for it in corpus.split(split):
            _save_image_png(split_dir / f"{it.id}.png", it.image)
            entry = {"id": it.id, "split": split, "label": it.label, "ood": it.ood,
                     "path": f"{split}/{it.id}.png"}
            if it.mask is not None:
                mask_path = split_dir / f"{it.id}_mask.png"
                Image.fromarray((it.mask * 255).astype(np.uint8), mode="L").save(
                    mask_path, format="PNG"
                )
                entry["mask_path"] = f"{split}/{it.id}_mask.png"
            manifest.append(entry)
    with open(root / "manifest.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for entry in manifest:
            f.write(json.dumps(entry, ensure_ascii=False) + "\n")
    click.echo(f"wrote {len(manifest)} corpus entries under {root}")


def _models_path(cfg):
    return Path(cfg.out_dir) / "models.npz"


def _save_models(cfg, models):
    np.savez(
        _models_path(cfg),
        clf_weight=models.classifier.weight,
        clf_bias=models.classifier.bias,
        ae_enc_weight=models.autoencoder.enc_weight,
        ae_enc_bias=models.autoencoder.enc_bias,
        ae_dec_weight=models.autoencoder.dec_weight,
        ae_dec_bias=models.autoencoder.dec_bias,
        inp_enc_weight=models.inpainter.enc_weight,
        inp_enc_bias=models.inpainter.enc_bias,
        inp_dec_weight=models.inpainter.dec_weight,
        inp_dec_bias=models.inpainter.dec_bias,
    )


def _load_models(cfg):
    path = _models_path(cfg)
    if not path.exists():
        raise InvalidArgumentError(f"models file {path} not found; run 'train' first")
    data = np.load(path)
    return pipe.Models(
        classifier=linear.LinearClassifier(weight=data["clf_weight"], bias=data["clf_bias"]),
        autoencoder=linear.LinearAutoencoder(
            enc_weight=data["ae_enc_weight"], enc_bias=data["ae_enc_bias"],
            dec_weight=data["ae_dec_weight"], dec_bias=data["ae_dec_bias"],
        ),
        inpainter=linear.Inpainter(
            enc_weight=data["inp_enc_weight"], enc_bias=data["inp_enc_bias"],
            dec_weight=data["inp_dec_weight"], dec_bias=data["inp_dec_bias"],
        ),
        segmenter=pipe.make_segmenter(cfg),
    )


@cli.command("train")
@common_options
@click.pass_context
def train(ctx, config_path, seed, out, fmt):
    """Train the reference classifier, autoencoder and inpainter."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
    corpus = pipe.build_corpus(cfg)
    models = pipe.train_models(cfg, corpus)
    _save_models(cfg, models)
    click.echo(f"saved models to {_models_path(cfg)}")


@cli.command("score")
@common_options
@click.pass_context
def score(ctx, config_path, seed, out, fmt):
    """Score the holdout and test splits into records.jsonl."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    corpus = pipe.build_corpus(cfg)
    models = _load_models(cfg)
    split_records = pipe.build_records(models, corpus)
    records = split_records["holdout"] + split_records["test_id"] + split_records["test_ood"]
    path = Path(cfg.out_dir) / "records.jsonl"
    write_records(path, records)
    click.echo(f"wrote {len(records)} records to {path}")


@cli.command("calibrate")
@common_options
@click.pass_context
def calibrate(ctx, config_path, seed, out, fmt):
    """Fit per-class loss stats and the z-score from holdout records."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    out = Path(cfg.out_dir)
    records = read_records(out / "records.jsonl")
    holdout = [r for r in records if r.split == "holdout"]
    if not holdout:
        raise InvalidArgumentError("records.jsonl contains no holdout records")
    from .types import ClassSet

    n = holdout[0].pred_probs.size
    stats = core.fit_class_loss_stats(holdout, ClassSet([str(i) for i in range(n)]))
    cal = core.calibrate_z(holdout, stats, cfg.grid)
    with open(out / "stats.json", "w", encoding="utf-8") as f:
        json.dump({"overall": pipe.stats_to_dict(stats)}, f, indent=2)
        f.write("\n")
    with open(out / "calibration.json", "w", encoding="utf-8") as f:
        json.dump({"overall": pipe.calibration_to_dict(cal)}, f, indent=2)
        f.write("\n")
    click.echo(f"z = {cal.z:.2f}, residual = {cal.residual:.6f}")


@cli.command("segment")
@common_options
@click.pass_context
def segment(ctx, config_path, seed, out, fmt):
    """Segment the test images and export 16-bit PGM label maps."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    corpus = pipe.build_corpus(cfg)
    segmenter = pipe.make_segmenter(cfg)
    seg_dir = Path(cfg.out_dir) / "segments"
    seg_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for it in corpus.test_id + corpus.test_ood:
        seg = segmenter(it.image)
        with open(seg_dir / f"{it.id}.pgm", "wb") as f:
            f.write(segmentation.segment_map_to_pgm(seg))
        count += 1
    click.echo(f"wrote {count} segment maps to {seg_dir}")


@cli.command("map")
@common_options
@click.pass_context
def map_cmd(ctx, config_path, seed, out, fmt):
    """Render competency-map PNGs for the OOD test images."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    corpus = pipe.build_corpus(cfg)
    models = _load_models(cfg)
    split_records = pipe.build_records(models, corpus)
    test_records = split_records["test_id"] + split_records["test_ood"]
    _, _, _, maps = pipe.regional_evaluation(cfg, models, corpus, test_records)
    maps_dir = Path(cfg.out_dir) / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)
    from .regional import render

    for it in corpus.test_ood:
        with open(maps_dir / f"{it.id}.png", "wb") as f:
            f.write(render.render_map(maps[it.id]))
    click.echo(f"wrote {len(corpus.test_ood)} competency maps to {maps_dir}")


@cli.command("perturb")
@common_options
@click.pass_context
def perturb_cmd(ctx, config_path, seed, out, fmt):
    """Run the perturbation sweep and record per-condition accuracy."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    corpus = pipe.build_corpus(cfg)
    models = _load_models(cfg)
    conditions = pipe.perturbation_sweep(cfg, models, corpus)
    summary = [
        {"property": c["property"], "level_index": c["level_index"],
         "accuracy": c["accuracy"], "bin": pipe.accuracy_bin(c["accuracy"])}
        for c in conditions
    ]
    path = Path(cfg.out_dir) / "sweep.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    click.echo(f"wrote {len(summary)} sweep conditions to {path}")


@cli.command("evaluate")
@click.option("--records", "records_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="records file (default: <out>/records.jsonl)")
@click.option("--methods", default=None, help="comma-separated method list")
@common_options
@click.pass_context
def evaluate(ctx, records_path, methods, config_path, seed, out, fmt):
    """Evaluate correct/incorrect/OOD separation over a records file."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_path = Path(records_path) if records_path else out / "records.jsonl"
    records = read_records(records_path)
    method_list = tuple(m.strip() for m in methods.split(",")) if methods else cfg.methods
    unknown = set(method_list) - set(ALL_METHODS)
    if unknown:
        raise InvalidArgumentError(f"unknown method(s) {sorted(unknown)}")

    holdout = [r for r in records if r.split == "holdout"]
    test = [r for r in records if r.split == "test"]
    if not test:
        raise InvalidArgumentError("records file contains no test records")

    needs_fit = set(method_list) - {"msp", "energy"}
    stats = cal = states = None
    if needs_fit:
        if not holdout:
            raise InvalidArgumentError(
                f"methods {sorted(needs_fit)} need holdout records to fit on"
            )
        from .types import ClassSet

        n = holdout[0].pred_probs.size
        stats = core.fit_class_loss_stats(holdout, ClassSet([str(i) for i in range(n)]))
        cal = core.calibrate_z(holdout, stats, cfg.grid)
        states = pipe.fit_baseline_states(cfg, holdout)

    eval_cfg = RunConfig(**{**cfg.to_dict(), "methods": method_list})
    rows = pipe.eval1_rows(eval_cfg, test, stats, cal.z if cal else 0.0, states)
    report = EvalReport(methods=list(method_list), pairs=pipe.EVAL1_PAIRS, rows=rows)
    text = report_to_json(report, include_timing=False)
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    click.echo(text if ctx.obj["format"] == "json" else report_to_table(report), nl=False)


@cli.command("report")
@common_options
@click.pass_context
def report_cmd(ctx, config_path, seed, out, fmt):
    """Print a previously written report in the selected format."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    path = Path(cfg.out_dir) / "report.json"
    if not path.exists():
        raise InvalidArgumentError(f"report file {path} not found")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    if ctx.obj["format"] == "json":
        click.echo(text, nl=False)
    else:
        click.echo(report_to_table(report_from_json(text)), nl=False)


@cli.command("run-all")
@common_options
@click.pass_context
def run_all(ctx, config_path, seed, out, fmt):
    """Run the full pipeline: corpus, models, scoring, calibration, evaluations."""
    cfg = _resolve(ctx, config_path, seed, out, fmt)
    report = pipe.run_pipeline(cfg)
    if ctx.obj["format"] == "json":
        click.echo(report_to_json(report, include_timing=False), nl=False)
    else:
        click.echo(report_to_table(report), nl=False)


def _emit_error(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        _emit_error("aborted", "aborted")
        return 1
    except click.exceptions.UsageError as exc:
        _emit_error("usage", exc.format_message())
        if exc.ctx is not None:
            sys.stderr.write(exc.ctx.get_usage() + "\n")
        return 1
    except ValueError as exc:
        # InvalidArgumentError / InvalidRecordError / InsufficientDataError etc.
        _emit_error("validation", str(exc))
        return 1
    except ParceError as exc:
        kind = "pipeline" if isinstance(exc, PipelineStageError) else "runtime"
        _emit_error(kind, str(exc))
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error("internal", f"{type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""End-to-end pipeline: corpus -> models -> scoring -> calibration -> evaluations.

Produces the artifact tree for a RunConfig: a records file, stats and
calibration files, the evaluation report (JSON + text table), per-run timing
(kept out of the deterministic report), and competency-map PNGs for every OOD
test image.
"""

import json
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np

from . import baselines, core
from .config import RunConfig
from .errors import ParceError, PipelineStageError
from .metrics import EvalReport, ScoredGroup, benchmark_time, evaluate_groups
from .records import write_records
from .refmodels import corpus as corpus_mod
from .refmodels import linear, perturb
from .regional import render, scoring, segmentation
from .report import report_to_json, report_to_table
from .types import SampleRecord

EVAL1_PAIRS = [("correct", "incorrect"), ("correct", "ood"), ("incorrect", "ood")]
EVAL2_PAIRS = [("acc_high", "acc_medium"), ("acc_high", "acc_low"), ("acc_medium", "acc_low")]
EVAL3_PAIRS = [
    ("id_all_pixels", "ood_unfamiliar_pixels"),
    ("ood_familiar_pixels", "ood_unfamiliar_pixels"),
]

ACC_HIGH = 0.9
ACC_LOW = 0.5


@dataclass
class Models:
    classifier: linear.LinearClassifier
    autoencoder: linear.LinearAutoencoder
    inpainter: linear.Inpainter
    segmenter: object  # image -> SegmentMap


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ParceError as exc:
        raise PipelineStageError(name, exc) from exc


def build_corpus(config):
    return corpus_mod.gen_synthetic_corpus(config.seed, config.sizes)


def make_segmenter(config):
    return partial(
        segmentation.felzenszwalb_segment,
        k=config.seg_k,
        min_size=config.seg_min_size,
        smooth_sigma=config.seg_smooth_sigma,
    )


def train_models(config, corpus):
    clf = linear.train_classifier(
        corpus,
        linear.TrainConfig(
            learning_rate=config.classifier_lr, epochs=config.classifier_epochs, seed=config.seed
        ),
    )
    ae = linear.train_autoencoder(
        corpus,
        linear.TrainConfig(
            learning_rate=config.autoencoder_lr,
            epochs=config.autoencoder_epochs,
            seed=config.seed,
            latent_dim=config.latent_dim,
        ),
    )
    segmenter = make_segmenter(config)
    inp = linear.train_inpainter(
        corpus,
        segmenter,
        linear.TrainConfig(
            learning_rate=config.inpainter_lr,
            epochs=config.inpainter_epochs,
            seed=config.seed,
            latent_dim=config.latent_dim,
        ),
    )
    return Models(classifier=clf, autoencoder=ae, inpainter=inp, segmenter=segmenter)


def _model_outputs(models, images):
    """Batch classifier/autoencoder outputs: probs, logits, latent features, recon losses."""
    X = np.stack([im.reshape(-1) for im in images])
    logits = linear.predict_logits_batch(models.classifier, X)
    probs = linear._softmax(logits)
    h = X @ models.autoencoder.enc_weight + models.autoencoder.enc_bias
    recon = h @ models.autoencoder.dec_weight + models.autoencoder.dec_bias
    losses = np.mean((recon - X) ** 2, axis=1)
    return probs, logits, h, losses


def build_records(models, corpus):
    """SampleRecords for the holdout and test splits."""
    out = {}
    for split_name, record_split in (("holdout", "holdout"), ("test_id", "test"), ("test_ood", "test")):
        items = corpus.split(split_name)
        probs, logits, feats, losses = _model_outputs(models, [it.image for it in items])
        out[split_name] = [
            SampleRecord(
                id=it.id,
                split=record_split,
                label=it.label,
                ood=it.ood,
                pred_probs=probs[i],
                logits=logits[i],
                features=feats[i],
                recon_loss=losses[i],
            )
            for i, it in enumerate(items)
        ]
    return out


@dataclass
class BaselineStates:
    temperature: float
    kl_templates: dict
    mahalanobis: baselines.MahalanobisState
    knn_bank: np.ndarray
    knn_k: int


def fit_baseline_states(config, holdout_records):
    logits = np.stack([r.logits for r in holdout_records])
    labels = np.array([r.label for r in holdout_records])
    probs = np.stack([r.pred_probs for r in holdout_records])
    feats = np.stack([r.features for r in holdout_records])
    predicted = probs.argmax(axis=1)
    return BaselineStates(
        temperature=baselines.fit_temperature(logits, labels),
        kl_templates=baselines.fit_kl_templates(probs, predicted, probs.shape[1]),
        mahalanobis=baselines.fit_mahalanobis(feats, labels),
        knn_bank=feats,
        knn_k=min(config.knn_k, feats.shape[0]),
    )


def batch_method_scores(method, probs, logits, feats, losses, stats, z, states):
    """Scores for one method over parallel arrays of model outputs."""
    if method == "parce":
        return core.competency_values(probs, losses, stats, z)
    if method == "msp":
        return probs.max(axis=1)
    if method == "temperature":
        return linear._softmax(logits / states.temperature).max(axis=1)
    if method == "energy":
        m = logits.max(axis=1, keepdims=True)
        return (m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))).ravel()
    if method == "kl_matching":
        return np.array([baselines.kl_matching_score(p, states.kl_templates) for p in probs])
    if method == "mahalanobis":
        diffs = states.mahalanobis.class_means[None, :, :] - feats[:, None, :]
        dists = np.einsum("ncd,de,nce->nc", diffs, states.mahalanobis.cov_inv, diffs)
        return -dists.min(axis=1)
    if method == "knn":
        bank = baselines._unit_normalize(states.knn_bank)
        q = baselines._unit_normalize(feats)
        dists = np.sqrt(
            np.maximum(
                (q**2).sum(1)[:, None] + (bank**2).sum(1)[None, :] - 2.0 * q @ bank.T, 0.0
            )
        )
        return -np.sort(dists, axis=1)[:, states.knn_k - 1]
    raise PipelineStageError("score", f"unknown method {method!r}")


def record_scorer(method, stats, z, states):
    """Per-record scorer (used for timing benchmarks)."""
    if method == "parce":
        return lambda rec: core.overall_competency(rec, stats, z).value
    if method == "msp":
        return lambda rec: baselines.msp_score(rec.pred_probs)
    if method == "temperature":
        return lambda rec: baselines.temperature_msp(rec.logits, states.temperature)
    if method == "energy":
        return lambda rec: baselines.energy_score(rec.logits)
    if method == "kl_matching":
        return lambda rec: baselines.kl_matching_score(rec.pred_probs, states.kl_templates)
    if method == "mahalanobis":
        return lambda rec: baselines.mahalanobis_score(rec.features, states.mahalanobis)
    if method == "knn":
        return lambda rec: baselines.knn_score(rec.features, states.knn_bank, states.knn_k)
    raise PipelineStageError("timing", f"unknown method {method!r}")


def _record_arrays(records):
    probs = np.stack([r.pred_probs for r in records])
    logits = np.stack([r.logits for r in records])
    feats = np.stack([r.features for r in records])
    losses = np.array([r.recon_loss for r in records])
    return probs, logits, feats, losses


def eval1_rows(config, records, stats, z, states):
    """Correct vs incorrect vs OOD comparisons over the test records."""
    probs, logits, feats, losses = _record_arrays(records)
    predicted = probs.argmax(axis=1)
    ood = np.array([r.ood for r in records])
    labels = np.array([-1 if r.label is None else r.label for r in records])
    correct = ~ood & (predicted == labels)
    incorrect = ~ood & (predicted != labels)

    rows = []
    for method in config.methods:
        scores = batch_method_scores(method, probs, logits, feats, losses, stats, z, states)
        groups = [
            ScoredGroup("correct", scores[correct]),
            ScoredGroup("incorrect", scores[incorrect]),
            ScoredGroup("ood", scores[ood]),
        ]
        rows.extend(evaluate_groups(groups, EVAL1_PAIRS, method=method))
    return rows


def perturbation_sweep(config, models, corpus):
    """Model outputs and accuracy for every (property, level) over the ID test split.

    Returns a list of dicts with keys property, level_index, accuracy and the
    batch model outputs for that condition.
    """
    items = corpus.test_id
    labels = np.array([it.label for it in items])
    conditions = []
    for prop_idx, prop in enumerate(config.perturb_properties):
        for level in range(perturb.N_LEVELS):
            seed = (config.seed * 1000 + prop_idx * 100 + level) % (2**32)
            images = [perturb.perturb_image(it.image, prop, level, seed=seed) for it in items]
            probs, logits, feats, losses = _model_outputs(models, images)
            accuracy = float(np.mean(probs.argmax(axis=1) == labels))
            conditions.append(
                {
                    "property": prop,
                    "level_index": level,
                    "accuracy": accuracy,
                    "probs": probs,
                    "logits": logits,
                    "feats": feats,
                    "losses": losses,
                }
            )
    return conditions


def accuracy_bin(accuracy):
    if accuracy >= ACC_HIGH:
        return "acc_high"
    if accuracy >= ACC_LOW:
        return "acc_medium"
    return "acc_low"


def eval2_rows(config, conditions, stats, z, states):
    """High/medium/low accuracy-bin comparisons over the perturbation sweep."""
    rows = []
    for method in config.methods:
        bins = {"acc_high": [], "acc_medium": [], "acc_low": []}
        for cond in conditions:
            scores = batch_method_scores(
                method, cond["probs"], cond["logits"], cond["feats"], cond["losses"],
                stats, z, states,
            )
            bins[accuracy_bin(cond["accuracy"])].append(scores)
        groups = [
            ScoredGroup(name, np.concatenate(parts) if parts else np.array([]))
            for name, parts in bins.items()
        ]
        rows.extend(evaluate_groups(groups, EVAL2_PAIRS, method=method))
    return rows


def regional_evaluation(config, models, corpus, records):
    """Regional calibration plus pixel-level familiar/unfamiliar comparisons.

    Returns (rows, regional_stats, regional_calibration, maps) where maps is
    {item id: CompetencyMap} over all test images.
    """
    n_classes = corpus.classes.class_count
    loss_fn = scoring.inpaint_loss_fn(models.inpainter)

    # holdout segment samples: per-segment loss, image probs, inherited correctness
    losses_by_class = {c: [] for c in range(n_classes)}
    seg_probs, seg_losses, seg_correct = [], [], []
    holdout_items = corpus.holdout
    probs, _, _, _ = _model_outputs(models, [it.image for it in holdout_items])
    for i, it in enumerate(holdout_items):
        seg = models.segmenter(it.image)
        losses = scoring.segment_losses_for(it.image, seg, loss_fn)
        losses_by_class[it.label].extend(losses)
        is_correct = int(np.argmax(probs[i])) == it.label
        for loss in losses:
            seg_probs.append(probs[i])
            seg_losses.append(loss)
            seg_correct.append(is_correct)
    regional_stats = scoring.fit_loss_stats_grouped(losses_by_class, n_classes)
    regional_cal = scoring.calibrate_regional_z(
        np.stack(seg_probs), np.array(seg_losses), np.array(seg_correct),
        regional_stats, config.grid, include_max_prob=config.regional_include_max_prob,
    )

    # competency maps for all test images; pixel groups for the comparison
    record_by_id = {r.id: r for r in records}
    maps = {}
    id_pixels, familiar_pixels, unfamiliar_pixels = [], [], []
    for it in corpus.test_id + corpus.test_ood:
        seg = models.segmenter(it.image)
        losses = scoring.segment_losses_for(it.image, seg, loss_fn)
        comp_map = scoring.regional_competency(
            it.image, record_by_id[it.id].pred_probs, seg, loss_fn, regional_stats,
            regional_cal.z, include_max_prob=config.regional_include_max_prob,
            segment_losses=losses,
        )
        maps[it.id] = comp_map
        record_by_id[it.id].segment_losses = [
            {"segment_id": s, "loss": float(losses[s]),
             "pixel_count": int((seg.labels == s).sum())}
            for s in range(seg.segment_count)
        ]
        if it.ood:
            familiar_pixels.append(comp_map.pixel_scores[~it.mask])
            unfamiliar_pixels.append(comp_map.pixel_scores[it.mask])
        else:
            id_pixels.append(comp_map.pixel_scores.ravel())

    groups = [
        ScoredGroup("id_all_pixels", np.concatenate(id_pixels)),
        ScoredGroup("ood_familiar_pixels", np.concatenate(familiar_pixels)),
        ScoredGroup("ood_unfamiliar_pixels", np.concatenate(unfamiliar_pixels)),
    ]
    rows = evaluate_groups(groups, EVAL3_PAIRS, method="parce")
    return rows, regional_stats, regional_cal, maps


def stats_to_dict(stats):
    return {
        "mean": [float(v) for v in stats.mean],
        "std": [float(v) for v in stats.std],
        "sample_count": [int(v) for v in stats.sample_count],
    }


def calibration_to_dict(cal):
    return {
        "z": cal.z,
        "residual": cal.residual,
        "grid_lo": cal.grid_lo,
        "grid_hi": cal.grid_hi,
        "grid_step": cal.grid_step,
        "implied_percentile": cal.implied_percentile,
    }


def run_pipeline(config, out_dir=None):
    """Run every stage and write the artifact tree; returns the EvalReport."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    corpus = _stage("gen-data", build_corpus, config)
    models = _stage("train", train_models, config, corpus)
    split_records = _stage("score", build_records, models, corpus)
    holdout_records = split_records["holdout"]
    test_records = split_records["test_id"] + split_records["test_ood"]

    stats = _stage("calibrate", core.fit_class_loss_stats, holdout_records, corpus.classes)
    cal = _stage("calibrate", core.calibrate_z, holdout_records, stats, config.grid)
    states = _stage("fit-baselines", fit_baseline_states, config, holdout_records)

    rows = []
    rows += _stage("eval1", eval1_rows, config, test_records, stats, cal.z, states)
    conditions = _stage("perturb", perturbation_sweep, config, models, corpus)
    rows += _stage("eval2", eval2_rows, config, conditions, stats, cal.z, states)
    eval3, regional_stats, regional_cal, maps = _stage(
        "eval3", regional_evaluation, config, models, corpus, test_records
    )
    rows += eval3

    timing_records = test_records[: config.timing_sample_count]
    timing = [
        (
            method,
            _stage(
                "timing",
                benchmark_time,
                record_scorer(method, stats, cal.z, states),
                timing_records,
                config.timing_repetitions,
            ),
        )
        for method in config.methods
    ]

    report = EvalReport(
        methods=list(config.methods),
        pairs=EVAL1_PAIRS + EVAL2_PAIRS + EVAL3_PAIRS,
        rows=rows,
        timing=timing,
    )

    write_records(out / "records.jsonl", holdout_records + test_records)
    with open(out / "stats.json", "w", encoding="utf-8") as f:
        json.dump(
            {"overall": stats_to_dict(stats), "regional": stats_to_dict(regional_stats)},
            f, indent=2,
        )
        f.write("\n")
    with open(out / "calibration.json", "w", encoding="utf-8") as f:
        json.dump(
            {"overall": calibration_to_dict(cal), "regional": calibration_to_dict(regional_cal)},
            f, indent=2,
        )
        f.write("\n")
    # timing is wall-clock noise; keep it out of the deterministic report file
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as f:
        f.write(report_to_json(report, include_timing=False))
    with open(out / "report.txt", "w", encoding="utf-8", newline="\n") as f:
        f.write(report_to_table(report))
    with open(out / "timing.json", "w", encoding="utf-8") as f:
        json.dump(
            [{"method": m, "sec_per_sample": s} for m, s in timing], f, indent=2
        )
        f.write("\n")

    maps_dir = out / "maps"
    maps_dir.mkdir(exist_ok=True)
    for it in corpus.test_ood:
        with open(maps_dir / f"{it.id}.png", "wb") as f:
            f.write(render.render_map(maps[it.id]))

    return report

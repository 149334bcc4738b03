"""Shared fixtures.

`default_run` executes the full default-config pipeline once per session (twice,
to audit byte determinism) and exposes the artifacts plus wall time; the
acceptance tests and a few regression anchors reuse it instead of re-running.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from parce.config import RunConfig
from parce.pipeline import run_pipeline
from parce.refmodels import gen_synthetic_corpus, train_autoencoder, train_classifier
from parce.refmodels.linear import TrainConfig


class DefaultRun:
    def __init__(self, out1, out2, report, wall_seconds):
        self.out1 = Path(out1)
        self.out2 = Path(out2)
        self.report = report
        self.wall_seconds = wall_seconds

    def artifact(self, name):
        return self.out1 / name

    def json_artifact(self, name):
        with open(self.out1 / name, "r", encoding="utf-8") as f:
            return json.load(f)


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("default-run")
    cfg = RunConfig(seed=42)
    start = time.perf_counter()
    report = run_pipeline(cfg, out_dir=root / "run1")
    wall = time.perf_counter() - start
    run_pipeline(RunConfig(seed=42), out_dir=root / "run2")
    return DefaultRun(root / "run1", root / "run2", report, wall)


@pytest.fixture(scope="session")
def default_models():
    """Default corpus and fully trained models (shared by the slower invariants)."""
    from parce.pipeline import build_corpus, train_models

    cfg = RunConfig(seed=42)
    corpus = build_corpus(cfg)
    models = train_models(cfg, corpus)
    return cfg, corpus, models


@pytest.fixture(scope="session")
def small_corpus():
    """Tiny corpus for unit tests: 60/20/20/20, seed 7."""
    return gen_synthetic_corpus(7, sizes=(60, 20, 20, 20))


@pytest.fixture(scope="session")
def small_models(small_corpus):
    clf = train_classifier(small_corpus, TrainConfig(learning_rate=0.2, epochs=200, seed=7))
    ae = train_autoencoder(small_corpus, TrainConfig(learning_rate=5.0, epochs=100, seed=7))
    return clf, ae


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)

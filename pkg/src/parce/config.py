"""Run configuration, loadable from TOML or JSON."""

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import InvalidArgumentError

ALL_METHODS = ("parce", "msp", "temperature", "energy", "kl_matching", "mahalanobis", "knn")


@dataclass
class RunConfig:
    seed: int = 42
    sizes: tuple = (600, 200, 200, 200)
    methods: tuple = ALL_METHODS
    out_dir: str = "out"

    # model hyperparameters
    classifier_lr: float = 0.2
    classifier_epochs: int = 4000
    autoencoder_lr: float = 5.0
    autoencoder_epochs: int = 300
    inpainter_lr: float = 0.5
    inpainter_epochs: int = 300
    latent_dim: int = 32

    # segmentation
    seg_k: float = 300.0
    seg_min_size: int = 20
    seg_smooth_sigma: float = 0.8

    # calibration grid
    grid: tuple = (-5.0, 5.0, 0.05)
    regional_include_max_prob: bool = False

    # baselines
    knn_k: int = 10

    # evaluation
    perturb_properties: tuple = ("saturation", "contrast", "brightness", "pixelation", "noise")
    timing_repetitions: int = 3
    timing_sample_count: int = 50

    def __post_init__(self):
        self.sizes = tuple(int(n) for n in self.sizes)
        self.methods = tuple(self.methods)
        self.grid = tuple(float(g) for g in self.grid)
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise InvalidArgumentError(f"unknown method(s) {sorted(unknown)}")

    def to_dict(self):
        return asdict(self)


def load_config(path):
    """Load a RunConfig from a .toml or .json file; unknown keys are rejected."""
    path = Path(path)
    if path.suffix == ".toml":
        with open(path, "rb") as f:
            data = tomllib.load(f)
    elif path.suffix == ".json":
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    else:
        raise InvalidArgumentError(f"config must be .toml or .json, got {path.suffix!r}")
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise InvalidArgumentError(f"unknown config key(s) {sorted(unknown)}")
    return RunConfig(**data)

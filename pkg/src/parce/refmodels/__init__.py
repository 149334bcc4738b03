from .corpus import CorpusItem, SyntheticCorpus, gen_synthetic_corpus
from .linear import (
    LinearAutoencoder,
    LinearClassifier,
    Inpainter,
    TrainConfig,
    predict_probs,
    recon_loss,
    segment_inpaint_loss,
    train_autoencoder,
    train_classifier,
    train_inpainter,
)
from .perturb import PERTURBATION_PROPERTIES, perturb_image

__all__ = [
    "CorpusItem",
    "SyntheticCorpus",
    "gen_synthetic_corpus",
    "LinearAutoencoder",
    "LinearClassifier",
    "Inpainter",
    "TrainConfig",
    "predict_probs",
    "recon_loss",
    "segment_inpaint_loss",
    "train_autoencoder",
    "train_classifier",
    "train_inpainter",
    "PERTURBATION_PROPERTIES",
    "perturb_image",
]

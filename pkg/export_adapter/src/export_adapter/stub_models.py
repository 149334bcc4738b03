"""Reference stub models for testing the export path without a DL framework.

Both follow the adapter's model protocol: the classifier exposes ``logits``
and ``features`` over an (B, H, W, 3) batch, the autoencoder ``reconstruct``.
"""

import numpy as np


class BrightnessClassifier:
    """Two-class classifier on mean brightness: class 0 below 0.5, class 1 above."""

    SCALE = 8.0

    def logits(self, batch):
        mean = np.asarray(batch).mean(axis=(1, 2, 3))
        return np.stack([self.SCALE * (0.5 - mean), self.SCALE * (mean - 0.5)], axis=1)

    def features(self, batch):
        # penultimate representation: per-channel means
        return np.asarray(batch).mean(axis=(1, 2))


class MeanAutoencoder:
    """Reconstructs every image as its own global mean color (loss = variance)."""

    def reconstruct(self, batch):
        batch = np.asarray(batch)
        mean = batch.mean(axis=(1, 2), keepdims=True)
        return np.broadcast_to(mean, batch.shape)


def build_classifier():
    return BrightnessClassifier()


def build_autoencoder():
    return MeanAutoencoder()

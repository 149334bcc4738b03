"""Linear reference models: softmax classifier, autoencoder, mask-conditioned inpainter.

All models are affine maps over flattened pixels, trained with full-batch
gradient descent (momentum 0.9), fully deterministic given the config seed.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidArgumentError, TrainingFailureError
from ..validation import check_image


@dataclass
class TrainConfig:
    learning_rate: float = 0.2
    epochs: int = 300
    seed: int = 0
    latent_dim: int = 32
    momentum: float = 0.9


@dataclass
class LinearClassifier:
    weight: np.ndarray  # (pixels, classes)
    bias: np.ndarray
    loss_trace: list = field(default_factory=list)

    @property
    def input_dim(self):
        return self.weight.shape[0]


@dataclass
class LinearAutoencoder:
    enc_weight: np.ndarray  # (pixels, latent)
    enc_bias: np.ndarray
    dec_weight: np.ndarray  # (latent, pixels)
    dec_bias: np.ndarray
    loss_trace: list = field(default_factory=list)

    @property
    def input_dim(self):
        return self.enc_weight.shape[0]


@dataclass
class Inpainter:
    """Autoencoder conditioned on a binary mask channel; masked pixels are zeroed."""

    enc_weight: np.ndarray  # (pixels + mask channel, latent)
    enc_bias: np.ndarray
    dec_weight: np.ndarray  # (latent, pixels)
    dec_bias: np.ndarray
    loss_trace: list = field(default_factory=list)


def _flatten(images):
    return np.stack([check_image(im).reshape(-1) for im in images])


def _softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def train_classifier(corpus, config=None):
    """Multinomial logistic regression on flattened pixels, full-batch GD."""
    config = config or TrainConfig(learning_rate=0.2, epochs=4000)
    if not corpus.train:
        raise InvalidArgumentError("train split is empty")
    X = _flatten([it.image for it in corpus.train])
    labels = np.array([it.label for it in corpus.train])
    n, d = X.shape
    k = corpus.classes.class_count
    onehot = np.eye(k)[labels]

    # plain GD: the problem is convex, and a momentum-free descent keeps the
    # loss trace monotone once past the first steps
    w = np.zeros((d, k))
    b = np.zeros(k)
    trace = []
    for _ in range(config.epochs):
        probs = _softmax(X @ w + b)
        loss = -np.mean(np.log(np.clip(probs[np.arange(n), labels], 1e-300, None)))
        if not np.isfinite(loss):
            raise TrainingFailureError("classifier training diverged (non-finite loss)")
        trace.append(float(loss))
        grad = probs - onehot
        w -= config.learning_rate * (X.T @ grad / n)
        b -= config.learning_rate * grad.mean(axis=0)
    return LinearClassifier(weight=w, bias=b, loss_trace=trace)


def predict_logits_batch(model, X):
    if X.shape[1] != model.input_dim:
        raise InvalidArgumentError(
            f"input dim {X.shape[1]} does not match model dim {model.input_dim}"
        )
    return X @ model.weight + model.bias


def predict_probs(model, image):
    """Softmax probabilities and raw logits for one image."""
    x = check_image(image).reshape(1, -1)
    logits = predict_logits_batch(model, x)[0]
    return _softmax(logits), logits


def _train_affine_ae(inputs, targets, loss_mask, config, in_dim, out_dim, kind):
    """Shared GD loop for the autoencoder and inpainter.

    loss_mask is None (plain MSE over all outputs) or an (N, out_dim) 0/1 matrix;
    the loss is then the mean squared error over masked outputs only.
    """
    rng = np.random.default_rng(config.seed)
    d = config.latent_dim
    if d >= in_dim:
        raise InvalidArgumentError(f"latent dim {d} must be smaller than input dim {in_dim}")
    w1 = rng.normal(0.0, 0.01, size=(in_dim, d))
    b1 = np.zeros(d)
    w2 = rng.normal(0.0, 0.01, size=(d, out_dim))
    b2 = np.zeros(out_dim)
    v = [np.zeros_like(p) for p in (w1, b1, w2, b2)]

    denom = targets.size if loss_mask is None else loss_mask.sum()
    trace = []
    for _ in range(config.epochs):
        h = inputs @ w1 + b1
        out = h @ w2 + b2
        resid = out - targets
        if loss_mask is not None:
            resid = resid * loss_mask
        loss = float(np.sum(resid**2) / denom)
        if not np.isfinite(loss):
            raise TrainingFailureError(f"{kind} training diverged (non-finite loss)")
        trace.append(loss)
        g_out = 2.0 * resid / denom
        gw2 = h.T @ g_out
        gb2 = g_out.sum(axis=0)
        g_h = g_out @ w2.T
        gw1 = inputs.T @ g_h
        gb1 = g_h.sum(axis=0)
        for p, vel, g in zip((w1, b1, w2, b2), v, (gw1, gb1, gw2, gb2)):
            vel *= config.momentum
            vel -= config.learning_rate * g
            p += vel
    return w1, b1, w2, b2, trace


def train_autoencoder(corpus, config=None):
    """MSE-trained affine encode/decode over flattened pixels."""
    config = config or TrainConfig(learning_rate=5.0, epochs=300)
    if not corpus.train:
        raise InvalidArgumentError("train split is empty")
    X = _flatten([it.image for it in corpus.train])
    w1, b1, w2, b2, trace = _train_affine_ae(
        X, X, None, config, X.shape[1], X.shape[1], "autoencoder"
    )
    return LinearAutoencoder(enc_weight=w1, enc_bias=b1, dec_weight=w2, dec_bias=b2, loss_trace=trace)


def encode(model, image):
    """Latent representation of one image (used as the feature vector)."""
    x = check_image(image).reshape(-1)
    return x @ model.enc_weight + model.enc_bias


def reconstruct(model, image):
    x = check_image(image).reshape(-1)
    h = x @ model.enc_weight + model.enc_bias
    return h @ model.dec_weight + model.dec_bias


def recon_loss(model, image):
    """Mean squared pixel error of the autoencoder reconstruction."""
    x = check_image(image).reshape(-1)
    return float(np.mean((reconstruct(model, image) - x) ** 2))


def _inpainter_input(image, mask):
    x = check_image(image)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape[:2]:
        raise InvalidArgumentError(f"mask shape {mask.shape} does not match image {x.shape[:2]}")
    if not mask.any():
        raise InvalidArgumentError("segment mask is empty")
    if mask.all():
        raise InvalidArgumentError("segment mask covers the whole image")
    zeroed = x.copy()
    zeroed[mask] = 0.0
    return np.concatenate([zeroed.reshape(-1), mask.reshape(-1).astype(float)])


def train_inpainter(corpus, segmenter, config=None):
    """Train the inpainter on (image, segment) pairs from the training split.

    segmenter maps an image to a SegmentMap; every segment of every training
    image becomes one training pair with that segment masked out.
    """
    config = config or TrainConfig(learning_rate=0.5, epochs=300)
    if not corpus.train:
        raise InvalidArgumentError("train split is empty")
    inputs, targets, masks = [], [], []
    for it in corpus.train:
        seg = segmenter(it.image)
        flat = it.image.reshape(-1)
        for s in range(seg.segment_count):
            mask = seg.labels == s
            if mask.all():
                continue  # single-segment image yields no usable pair
            inputs.append(_inpainter_input(it.image, mask))
            targets.append(flat)
            masks.append(np.repeat(mask.reshape(-1), 3).astype(float))
    if not inputs:
        raise InvalidArgumentError("no usable (image, segment) training pairs")
    inputs = np.stack(inputs)
    targets = np.stack(targets)
    masks = np.stack(masks)
    w1, b1, w2, b2, trace = _train_affine_ae(
        inputs, targets, masks, config, inputs.shape[1], targets.shape[1], "inpainter"
    )
    return Inpainter(enc_weight=w1, enc_bias=b1, dec_weight=w2, dec_bias=b2, loss_trace=trace)


def segment_inpaint_loss(model, image, segment_mask):
    """Mean squared error over the masked pixels of the inpainted reconstruction."""
    x = _inpainter_input(image, segment_mask)
    h = x @ model.enc_weight + model.enc_bias
    out = h @ model.dec_weight + model.dec_bias
    flat = check_image(image).reshape(-1)
    sel = np.repeat(np.asarray(segment_mask, dtype=bool).reshape(-1), 3)
    return float(np.mean((out[sel] - flat[sel]) ** 2))

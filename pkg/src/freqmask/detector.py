"""Desk-scale real/fake detector.

Images are summarized by an azimuthally averaged log-power spectrum plus a
high/low band energy ratio, and a logistic-regression head is fitted on
those features with binary cross-entropy and plain SGD. Augmentation and
masking run only inside :func:`train`; :func:`predict` sees clean images.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .image_core import AugmentSettings, ImageBuffer, augment_with, ensure_parent
from .masking import MaskSpec, apply_mask, band_mask
from .rng import RandomStream
from .spectrum import fft2_array

__all__ = [
    "DEFAULT_BINS",
    "FORMAT_VERSION",
    "LinearDetector",
    "TrainConfig",
    "NotFittedError",
    "TrainingDivergedError",
    "extract_features",
    "extract_features_batch",
    "bce_loss",
    "bce_grad",
    "fit_linear",
    "train",
    "predict",
    "predict_batch",
    "decision_batch",
    "sigmoid",
]

DEFAULT_BINS = 32
FORMAT_VERSION = 1
RATIO_EPS = 1e-12
STD_FLOOR = 1e-8


class NotFittedError(RuntimeError):
    pass


class TrainingDivergedError(FloatingPointError):
    """Loss became non-finite, usually a learning rate that is too large."""


# ---------------------------------------------------------------- features


@lru_cache(maxsize=32)
def _feature_geometry(height: int, width: int, bins: int):
    """Annulus averaging matrix and band masks for an ``H x W`` grid."""
    u = np.arange(height)
    v = np.arange(width)
    du = np.minimum(u, height - u)[:, None]
    dv = np.minimum(v, width - v)[None, :]
    radius = np.sqrt(du ** 2 + dv ** 2).ravel()
    r_max = radius.max()
    label = np.zeros(radius.shape, dtype=np.int64)
    if r_max > 0:
        nz = radius > 0
        # annulus k covers ((k-1) r_max / B, k r_max / B], DC is in no annulus
        label[nz] = np.clip(np.ceil(radius[nz] * bins / r_max - 1e-9), 1, bins).astype(np.int64)
    avg = np.zeros((bins, height * width))
    for k in range(1, bins + 1):
        members = label == k
        count = members.sum()
        if count:
            avg[k - 1, members] = 1.0 / count
    if height >= 4 and width >= 4:
        high = band_mask("high", height, width).ravel()
        low = band_mask("low", height, width).ravel()
    else:
        high = np.zeros(height * width, dtype=bool)
        low = np.zeros(height * width, dtype=bool)
    low = low.copy()
    low[0] = False
    for a in (avg, high, low):
        a.flags.writeable = False
    return avg, high, low


def extract_features_batch(images: Sequence[ImageBuffer], bins: int = DEFAULT_BINS) -> np.ndarray:
    """Feature matrix of shape ``(n, bins + 1)`` for equally sized images."""
    if len(images) == 0:
        return np.zeros((0, bins + 1))
    h, w = images[0].height, images[0].width
    for img in images:
        if img.height != h or img.width != w:
            raise ValueError("all images in a batch must share one size")
    stack = np.stack([img.grayscale() for img in images], axis=-1)
    coeffs = fft2_array(stack)
    power = (coeffs.real ** 2 + coeffs.imag ** 2).reshape(h * w, -1)
    avg, high, low = _feature_geometry(h, w, bins)
    radial = np.log1p(avg @ power)
    ratio = np.log((power[high].sum(axis=0) + RATIO_EPS) / (power[low].sum(axis=0) + RATIO_EPS))
    return np.vstack([radial, ratio[None, :]]).T


def extract_features(image: ImageBuffer, bins: int = DEFAULT_BINS) -> np.ndarray:
    """``bins`` annulus log-powers around DC plus the log high/low band energy ratio."""
    return extract_features_batch([image], bins)[0]


# ------------------------------------------------------------------- model


def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


def bce_loss(weights: np.ndarray, bias: float, x: np.ndarray, y, l2_penalty: float = 0.0) -> float:
    """Mean BCE of ``sigmoid(x @ w + b)`` against ``y``, plus ``l2 * ||w||^2``."""
    x = np.atleast_2d(x)
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    z = x @ weights + bias
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + l2_penalty * weights @ weights)


def bce_grad(weights: np.ndarray, bias: float, x: np.ndarray, y, l2_penalty: float = 0.0):
    """Analytic gradient of :func:`bce_loss` as ``(dw, db)``."""
    x = np.atleast_2d(x)
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    resid = sigmoid(x @ weights + bias) - y
    dw = x.T @ resid / x.shape[0] + 2.0 * l2_penalty * weights
    return dw, float(resid.mean())


@dataclass
class LinearDetector:
    weights: Optional[np.ndarray] = None
    bias: float = 0.0
    feature_mean: Optional[np.ndarray] = None
    feature_std: Optional[np.ndarray] = None
    feature_bins: int = DEFAULT_BINS
    loss_history: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.weights is None:
            return
        self.weights = np.asarray(self.weights, dtype=np.float64)
        d = self.weights.shape[0]
        self.feature_mean = (np.zeros(d) if self.feature_mean is None
                             else np.asarray(self.feature_mean, dtype=np.float64))
        self.feature_std = (np.ones(d) if self.feature_std is None
                            else np.maximum(np.asarray(self.feature_std, dtype=np.float64), STD_FLOOR))
        if self.feature_mean.shape != (d,) or self.feature_std.shape != (d,):
            raise ValueError("standardization vectors must match the weight length")
        self.bias = float(self.bias)

    @property
    def fitted(self) -> bool:
        return self.weights is not None

    def standardize(self, features: np.ndarray) -> np.ndarray:
        return (features - self.feature_mean) / self.feature_std

    def decision(self, features: np.ndarray) -> np.ndarray:
        if not self.fitted:
            raise NotFittedError("detector has not been fitted")
        return self.standardize(features) @ self.weights + self.bias

    def to_dict(self) -> dict:
        if not self.fitted:
            raise NotFittedError("cannot serialize an unfitted detector")
        return {
            "format_version": FORMAT_VERSION,
            "feature_bins": self.feature_bins,
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearDetector":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported detector format_version {d.get('format_version')!r}")
        return cls(weights=d["weights"], bias=d["bias"], feature_mean=d["feature_mean"],
                   feature_std=d["feature_std"], feature_bins=int(d["feature_bins"]))

    def save(self, path) -> None:
        ensure_parent(path)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LinearDetector":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class TrainConfig:
    mask_spec: Optional[MaskSpec] = None
    epochs: int = 10
    learning_rate: float = 0.05
    l2_penalty: float = 1e-3
    seed: int = 0
    augment: AugmentSettings = AugmentSettings()
    feature_bins: int = DEFAULT_BINS
    full_batch: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.l2_penalty < 0:
            raise ValueError(f"l2_penalty must be >= 0, got {self.l2_penalty}")


def fit_linear(
    features: np.ndarray,
    labels: np.ndarray,
    config: TrainConfig,
    order_stream: Optional[RandomStream] = None,
) -> LinearDetector:
    """Fit standardization and logistic weights on precomputed features.

    ``features`` is ``(n, d)`` (reused every epoch) or ``(epochs, n, d)``
    (one view of the training set per epoch, as produced by augmentation and
    masking). Standardization is fitted on all rows.
    """
    labels = np.asarray(labels, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 2:
        features = np.broadcast_to(features, (config.epochs,) + features.shape)
    if features.shape[0] != config.epochs or features.shape[1] != labels.shape[0]:
        raise ValueError("features must be (n, d) or (epochs, n, d) matching the labels")
    if np.unique(labels).size < 2:
        raise ValueError("training set must contain both classes")
    if order_stream is None:
        order_stream = RandomStream(config.seed).derive_substream(1)

    d = features.shape[2]
    flat = features.reshape(-1, d)
    mean = flat.mean(axis=0)
    std = np.maximum(flat.std(axis=0), STD_FLOOR)
    z = (features - mean) / std

    w = np.zeros(d)
    b = 0.0
    lr, lam = config.learning_rate, config.l2_penalty
    history = []
    for epoch in range(config.epochs):
        x = z[epoch]
        if config.full_batch:
            history.append(bce_loss(w, b, x, labels, lam))
            dw, db = bce_grad(w, b, x, labels, lam)
            w = w - lr * dw
            b -= lr * db
        else:
            total = 0.0
            for i in order_stream.derive_substream(epoch).permutation(labels.shape[0]).tolist():
                xi, yi = x[i], labels[i]
                s = xi @ w + b
                total += np.logaddexp(0.0, s) - yi * s
                resid = sigmoid(s) - yi
                w = w - lr * (resid * xi + 2.0 * lam * w)
                b -= lr * resid
            history.append(total / labels.shape[0] + lam * float(w @ w))
        if not np.isfinite(history[-1]) or not np.all(np.isfinite(w)):
            raise TrainingDivergedError(
                f"non-finite loss at epoch {epoch}; lower the learning rate (now {lr})")
    return LinearDetector(weights=w, bias=b, feature_mean=mean, feature_std=std,
                          feature_bins=config.feature_bins, loss_history=history)


def train(train_set: Sequence[tuple[ImageBuffer, int]], config: TrainConfig) -> LinearDetector:
    """Fit a detector: per epoch and image, augment, then mask, then extract features.

    Image ``i`` in epoch ``e`` draws its augmentation and mask from substreams
    keyed by ``(e, i)``, so its draws do not depend on visiting order.
    """
    images = [img for img, _ in train_set]
    labels = np.array([int(lbl) for _, lbl in train_set], dtype=np.float64)
    if np.unique(labels).size < 2:
        raise ValueError("training set must contain both classes")
    root = RandomStream(config.seed)
    bins = config.feature_bins
    clean = None
    views = np.empty((config.epochs, len(images), bins + 1))
    for epoch in range(config.epochs):
        batch = []
        for i, img in enumerate(images):
            stream = root.derive_substream(0, epoch, i)
            out = augment_with(img, stream.derive_substream(0), config.augment)
            if config.mask_spec is not None:
                out = apply_mask(out, config.mask_spec, stream.derive_substream(1))
            batch.append(out)
        # images that came through unmodified reuse their clean features
        untouched = [i for i in range(len(images)) if batch[i] is images[i]]
        changed = [i for i in range(len(images)) if batch[i] is not images[i]]
        if untouched:
            if clean is None:
                clean = extract_features_batch(images, bins)
            views[epoch, untouched] = clean[untouched]
        if changed:
            views[epoch, changed] = extract_features_batch([batch[i] for i in changed], bins)
    return fit_linear(views, labels, config, order_stream=root.derive_substream(1))


def decision_batch(detector: LinearDetector, images: Sequence[ImageBuffer]) -> np.ndarray:
    """Pre-sigmoid scores ``w . x + b``; same ranking as :func:`predict_batch` without saturation ties."""
    if detector is None or not detector.fitted:
        raise NotFittedError("detector has not been fitted")
    return detector.decision(extract_features_batch(images, detector.feature_bins))


def predict_batch(detector: LinearDetector, images: Sequence[ImageBuffer]) -> np.ndarray:
    """Scores in ``(0, 1)``; no augmentation or masking is applied."""
    return sigmoid(decision_batch(detector, images))


def predict(detector: LinearDetector, image: ImageBuffer) -> float:
    return float(predict_batch(detector, [image])[0])

"""Problem description for a fully connected CRF over an image grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

APPEARANCE = "appearance"
SMOOTHNESS = "smoothness"


@dataclass(frozen=True)
class KernelSpec:
    """One weighted Gaussian pairwise kernel.

    ``spatial`` is the positional bandwidth in pixels (alpha for appearance,
    gamma for smoothness); ``range`` is the feature bandwidth beta and only
    applies to appearance kernels.  ``weights`` holds one non-negative weight
    per class.
    """

    kind: str
    spatial: float
    weights: tuple[float, ...]
    range: float | None = None

    def __post_init__(self):
        if self.kind not in (APPEARANCE, SMOOTHNESS):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.spatial > 0:
            raise ValueError("spatial bandwidth must be positive")
        if self.kind == APPEARANCE and not (self.range is not None and self.range > 0):
            raise ValueError("appearance kernels need a positive range bandwidth")
        w = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("kernel weights must be finite and non-negative")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))

    def class_weights(self, k: int) -> np.ndarray:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.size == 1:
            return np.full(k, w[0])
        if w.size != k:
            raise ValueError(f"kernel has {w.size} class weights, problem has {k} classes")
        return w

    def scaled_features(self, shape, features=None) -> np.ndarray:
        """Per-pixel feature vectors divided by their bandwidths, shape (n, D)."""
        h, w = shape
        yy, xx = np.mgrid[0:h, 0:w]
        pos = np.stack([yy.ravel(), xx.ravel()], axis=1).astype(np.float64) / self.spatial
        if self.kind == SMOOTHNESS:
            return pos
        if features is None:
            raise ValueError("appearance kernels need a feature field")
        f = np.asarray(features, dtype=np.float64).reshape(h * w, -1) / self.range
        return np.concatenate([pos, f], axis=1)


@dataclass(frozen=True)
class DenseCrfProblem:
    """Unary energies (h, w, k), pairwise kernels, features (h, w, d) and Potts scale w0."""

    unary: np.ndarray
    kernels: tuple[KernelSpec, ...]
    features: np.ndarray | None = None
    w0: float = 1.0

    def __post_init__(self):
        unary = np.array(self.unary, dtype=np.float64)
        if unary.ndim != 3 or unary.shape[2] < 2:
            raise ValueError(f"unary must have shape (h, w, k>=2), got {unary.shape}")
        if not np.all(np.isfinite(unary)):
            raise ValueError("unary energies must be finite")
        feats = self.features
        if feats is not None:
            feats = np.array(feats, dtype=np.float64)
            if feats.ndim == 2:
                feats = feats[:, :, None]
            if feats.shape[:2] != unary.shape[:2]:
                raise ValueError("feature field does not match the unary shape")
            if not np.all(np.isfinite(feats)):
                raise ValueError("features must be finite")
        if self.w0 < 0:
            raise ValueError("w0 must be non-negative")
        kernels = tuple(self.kernels)
        for kern in kernels:
            kern.class_weights(unary.shape[2])
            if kern.kind == APPEARANCE and feats is None:
                raise ValueError("appearance kernel given without features")
        unary.setflags(write=False)
        if feats is not None:
            feats.setflags(write=False)
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "w0", float(self.w0))

    @property
    def shape(self) -> tuple[int, int]:
        return self.unary.shape[:2]

    @property
    def n_classes(self) -> int:
        return self.unary.shape[2]

    @property
    def n_pixels(self) -> int:
        return self.unary.shape[0] * self.unary.shape[1]


@dataclass(frozen=True)
class Marginals:
    """Per-pixel class probabilities of shape (h, w, k)."""

    q: np.ndarray

    def labels(self) -> np.ndarray:
        return np.argmax(self.q, axis=2)

    def simplex_residual(self) -> float:
        return float(np.abs(self.q.sum(axis=2) - 1.0).max())

"""Refine a foreground probability map with a dense CRF."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..core import Image2D, ProbabilityMap, standardize
from .inference import frank_wolfe_infer, initial_marginals, mean_field_infer
from .model import APPEARANCE, SMOOTHNESS, DenseCrfProblem, KernelSpec, Marginals

log = logging.getLogger(__name__)

SOLVERS = ("meanfield", "frankwolfe")
MAX_FEATURE_DIMS = 3


@dataclass(frozen=True)
class CrfConfig:
    """Settings for :func:`refine`.

    Intensities and feature channels are standardized and multiplied by
    ``feature_scale`` before the range bandwidth ``beta`` is applied.
    Weights may be scalars or one value per class (background, foreground).
    The appearance kernel spans most of the image, so the default gives
    foreground pixels far more pull than the far more numerous background.
    """

    solver: str = "frankwolfe"
    iterations: int = 5
    w0: float = 1.0
    w_appearance: float | tuple[float, ...] = (2e-5, 1e-3)
    w_smoothness: float | tuple[float, ...] = 0.1
    alpha: float = 80.0
    beta: float = 13.0
    gamma: float = 3.0
    regularizer: float = 1.0
    step: str | float = "harmonic"
    epsilon: float = 1e-6
    feature_scale: float = 10.0
    samples_per_sigma: float = 4.0

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("w_appearance", "w_smoothness"):
            if isinstance(d[key], (list, tuple)):
                d[key] = list(d[key])
        return d


def unary_from_probability(prob: np.ndarray, epsilon: float = 1e-6) -> np.ndarray:
    """Two-class energies ``-log(1 - p), -log(p)`` after clamping to [eps, 1 - eps]."""
    p = np.clip(np.asarray(prob, dtype=np.float64), epsilon, 1.0 - epsilon)
    return np.stack([-np.log1p(-p), -np.log(p)], axis=2)


def _standardize_channels(feats: np.ndarray) -> np.ndarray:
    out = feats - feats.mean(axis=(0, 1))
    sd = out.std(axis=(0, 1))
    sd[sd == 0] = 1.0
    return out / sd


def prepare_features(image: Image2D | None, features=None, scale: float = 10.0) -> np.ndarray:
    """Feature field for the appearance kernel, shape (h, w, d).

    Without ``features`` the standardized image intensity is used.  Supplied
    features have each channel standardized; more than three channels are
    reduced to their leading principal components so the filtering grid stays
    small.
    """
    if features is None:
        if image is None:
            raise ValueError("need an image or a feature field")
        return standardize(image).data.astype(np.float64)[:, :, None] * scale
    f = np.asarray(features, dtype=np.float64)
    if f.ndim == 2:
        f = f[:, :, None]
    if f.ndim != 3:
        raise ValueError(f"features must be (h, w) or (h, w, d), got {f.shape}")
    f = _standardize_channels(f)
    if f.shape[2] > MAX_FEATURE_DIMS:
        h, w, d = f.shape
        flat = f.reshape(-1, d)
        _, _, vt = np.linalg.svd(flat, full_matrices=False)
        f = _standardize_channels((flat @ vt[:MAX_FEATURE_DIMS].T).reshape(h, w, -1))
        log.info("reduced %d feature channels to %d principal components", d, MAX_FEATURE_DIMS)
    return f * scale


def build_problem(prob_map: ProbabilityMap, image: Image2D | None = None, features=None,
                  config: CrfConfig = CrfConfig()) -> DenseCrfProblem:
    unary = unary_from_probability(prob_map.data, config.epsilon)
    kernels = [KernelSpec(SMOOTHNESS, config.gamma, np.atleast_1d(config.w_smoothness))]
    feats = None
    if np.any(np.asarray(config.w_appearance) > 0):
        feats = prepare_features(image, features, config.feature_scale)
        kernels.append(KernelSpec(APPEARANCE, config.alpha, np.atleast_1d(config.w_appearance),
                                  config.beta))
    return DenseCrfProblem(unary, tuple(kernels), feats, config.w0)


def refine(prob_map: ProbabilityMap, image: Image2D | None = None, features=None,
           config: CrfConfig = CrfConfig()) -> ProbabilityMap:
    """Return the CRF-refined foreground marginal.

    The appearance kernel runs over raw intensity of ``image`` unless a
    discriminative ``features`` field (h, w) or (h, w, d) is supplied.  Zero
    iterations return the initialization, i.e. the clamped input map.
    """
    if image is not None and image.shape != prob_map.shape:
        raise ValueError(f"image shape {image.shape} does not match map {prob_map.shape}")
    if features is not None and np.shape(features)[:2] != prob_map.shape:
        raise ValueError(f"feature shape {np.shape(features)} does not match map {prob_map.shape}")
    problem = build_problem(prob_map, image, features, config)

    def report(t, q):
        log.info("%s iteration %d: simplex residual %.2e", config.solver, t + 1,
                 float(np.abs(q.sum(axis=2) - 1.0).max()))

    if config.iterations == 0:
        marg = Marginals(initial_marginals(problem))
    elif config.solver == "meanfield":
        marg = mean_field_infer(problem, config.iterations,
                                samples_per_sigma=config.samples_per_sigma, callback=report)
    else:
        marg = frank_wolfe_infer(problem, config.iterations, step=config.step,
                                 regularizer=config.regularizer,
                                 samples_per_sigma=config.samples_per_sigma, callback=report)
    q1 = np.clip(marg.q[:, :, 1], 0.0, 1.0)
    return ProbabilityMap(q1, prob_map.pixel_size)

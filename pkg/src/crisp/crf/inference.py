"""Energy evaluation and approximate inference for dense Potts CRFs.

Messages weight each filtered class channel by its kernel weight before the
Potts transform, so label ``l`` at pixel i receives

    w0 * sum_m sum_{c != l} w_m[c] * sum_j k_m(f_i, f_j) Q_j(c)

When every class shares the same weight this is exactly the gradient of the
relaxed Gibbs energy.  :func:`energy` scores discrete labelings with the
symmetric pair cost ``w0 * [a != b] * sum_m (w_m[a] + w_m[b]) / 2 * k_m``,
which agrees with the messages in that case.
"""
from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
from scipy.special import softmax

from .filtering import MAX_EXACT_PIXELS, filter_bruteforce, filter_fast
from .model import DenseCrfProblem, Marginals

log = logging.getLogger(__name__)

IterCallback = Callable[[int, np.ndarray], None]


def _pair_cost_table(problem: DenseCrfProblem, kernel) -> np.ndarray:
    w = kernel.class_weights(problem.n_classes)
    table = 0.5 * (w[:, None] + w[None, :])
    np.fill_diagonal(table, 0.0)
    return problem.w0 * table


def energy(problem: DenseCrfProblem, labeling, limit: int = MAX_EXACT_PIXELS) -> float:
    """Exact Gibbs energy of a discrete labeling by summing every pixel pair."""
    labels = np.asarray(getattr(labeling, "labels", labeling)).astype(np.int64)
    if labels.shape != problem.shape:
        raise ValueError(f"labeling shape {labels.shape} does not match problem {problem.shape}")
    n = problem.n_pixels
    if n > limit:
        raise ValueError(f"exact energy is capped at {limit} pixels, got {n}")
    flat = labels.ravel()
    if flat.min() < 0 or flat.max() >= problem.n_classes:
        raise ValueError("labels out of range")
    unary = problem.unary.reshape(n, -1)
    total = float(unary[np.arange(n), flat].sum())
    for kernel in problem.kernels:
        table = _pair_cost_table(problem, kernel)
        if not table.any():
            continue
        f = kernel.scaled_features(problem.shape, problem.features)
        for start in range(0, n, 512):
            stop = min(start + 512, n)
            diff = f[start:stop, None, :] - f[None, :, :]
            kern = np.exp(-0.5 * np.einsum("ijd,ijd->ij", diff, diff))
            cost = table[flat[start:stop, None], flat[None, :]]
            upper = np.arange(n)[None, :] > np.arange(start, stop)[:, None]
            total += float((kern * cost * upper).sum())
    return total


def _filter(problem, exact, samples_per_sigma):
    if exact:
        return lambda q, kern: filter_bruteforce(q, kern, problem.features)
    return lambda q, kern: filter_fast(q, kern, problem.features, samples_per_sigma)


def pairwise_messages(problem: DenseCrfProblem, q: np.ndarray, exact=False,
                      samples_per_sigma=4.0) -> np.ndarray:
    """Potts messages of each label at each pixel under marginals ``q``.

    With class-independent weights this is the gradient of the pairwise part
    of the relaxed energy.
    """
    filt = _filter(problem, exact, samples_per_sigma)
    out = np.zeros_like(q)
    k = problem.n_classes
    for kernel in problem.kernels:
        w = kernel.class_weights(k)
        if problem.w0 == 0 or not w.any():
            continue
        filtered = filt(q, kernel)
        weighted = filtered * w
        out += weighted.sum(axis=2, keepdims=True) - weighted
    return problem.w0 * out


def relaxed_energy(problem: DenseCrfProblem, q, exact=False, samples_per_sigma=4.0) -> float:
    """Multilinear relaxation of the energy evaluated at marginals ``q``."""
    q = np.asarray(getattr(q, "q", q), dtype=np.float64)
    msg = pairwise_messages(problem, q, exact, samples_per_sigma)
    return float((problem.unary * q).sum() + 0.5 * (msg * q).sum())


def initial_marginals(problem: DenseCrfProblem, init: str = "softmax") -> np.ndarray:
    if init in ("softmax", "softmax-unary"):
        return softmax(-problem.unary, axis=2)
    if init == "uniform":
        return np.full(problem.unary.shape, 1.0 / problem.n_classes)
    raise ValueError(f"unknown initialization {init!r}")


def _schedule(value, iterations, name):
    sched = np.broadcast_to(np.asarray(value, dtype=np.float64), (iterations,)) \
        if np.ndim(value) == 0 else np.asarray(value, dtype=np.float64)
    if sched.shape != (iterations,):
        raise ValueError(f"{name} schedule needs {iterations} entries, got {sched.shape}")
    if not np.all(sched > 0):
        raise ValueError(f"{name} must be positive")
    return sched


class _BestRounded:
    """Keeps the iterate whose argmax labeling has the lowest energy."""

    def __init__(self, problem, exact, samples_per_sigma):
        self.problem, self.exact, self.sps = problem, exact, samples_per_sigma
        self.best_q, self.best_e = None, np.inf

    def offer(self, q):
        k = self.problem.n_classes
        onehot = np.eye(k)[q.argmax(axis=2)]
        e = relaxed_energy(self.problem, onehot, self.exact, self.sps)
        if e < self.best_e:
            self.best_q, self.best_e = q, e


def mean_field_infer(problem: DenseCrfProblem, iterations: int = 5, init: str = "softmax",
                     exact: bool = False, samples_per_sigma: float = 4.0,
                     temperature=1.0, track_best: bool = False,
                     callback: IterCallback | None = None) -> Marginals:
    """Parallel mean-field updates ``Q <- softmax(-(unary + messages(Q)) / T)``.

    ``temperature`` is a scalar or one value per iteration; a decreasing
    schedule anneals toward the MAP labeling instead of the marginals.  With
    ``track_best`` the iterate whose argmax has the lowest energy is returned,
    so the result is never worse than the rounded initialization.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    temps = _schedule(temperature, iterations, "temperature")
    q = initial_marginals(problem, init)
    best = _BestRounded(problem, exact, samples_per_sigma) if track_best else None
    if best:
        best.offer(q)
    for t in range(iterations):
        msg = pairwise_messages(problem, q, exact, samples_per_sigma)
        q = softmax(-(problem.unary + msg) / temps[t], axis=2)
        if best:
            best.offer(q)
        if callback is not None:
            callback(t, q)
    return Marginals(best.best_q if best else q)


def step_size(rule, t: int) -> float:
    """Step for iteration ``t`` (0-based): "harmonic" is 2/(t+2), a float is a fixed step."""
    if rule in (None, "harmonic", "2/(t+2)"):
        return 2.0 / (t + 2.0)
    eta = float(rule)
    if not 0 < eta <= 1:
        raise ValueError("a fixed step must lie in (0, 1]")
    return eta


def frank_wolfe_infer(problem: DenseCrfProblem, iterations: int = 5, step="harmonic",
                      regularizer=1.0, init: str = "softmax", exact: bool = False,
                      samples_per_sigma: float = 4.0, track_best: bool = False,
                      callback: IterCallback | None = None) -> Marginals:
    """Entropy-regularized Frank-Wolfe on the product of per-pixel simplices.

    Each step solves ``min_s <grad, s> - regularizer * H(s)`` in closed form,
    ``s = softmax(-grad / regularizer)``, and moves ``Q <- (1 - eta) Q + eta s``.
    ``regularizer`` may be a per-iteration schedule; ``track_best`` behaves as
    in :func:`mean_field_infer`.
    """
    if iterations < 1:
        raise ValueError("Frank-Wolfe needs at least one iteration")
    lams = _schedule(regularizer, iterations, "regularizer strength")
    q = initial_marginals(problem, init)
    best = _BestRounded(problem, exact, samples_per_sigma) if track_best else None
    if best:
        best.offer(q)
    for t in range(iterations):
        grad = problem.unary + pairwise_messages(problem, q, exact, samples_per_sigma)
        target = softmax(-grad / lams[t], axis=2)
        eta = step_size(step, t)
        q = (1.0 - eta) * q + eta * target
        if best:
            best.offer(q)
        if callback is not None:
            callback(t, q)
    return Marginals(best.best_q if best else q)

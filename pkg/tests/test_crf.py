import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import softmax

from crf_cases import FW_MAP, MF_MAP, exhaustive_map, oracle_problem
from crisp.core import Image2D, ProbabilityMap
from crisp.crf import (APPEARANCE, SMOOTHNESS, CrfConfig, DenseCrfProblem, KernelSpec, energy,
                       filter_bruteforce, filter_fast, frank_wolfe_infer, mean_field_infer,
                       pairwise_messages, refine, relaxed_energy, unary_from_probability)
from crisp.crf.inference import step_size
from crisp.synth import salt_noise_map


def iou(a, b):
    a, b = np.asarray(a, bool), np.asarray(b, bool)
    return (a & b).sum() / (a | b).sum()


def rel_l2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


# model validation

def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec(SMOOTHNESS, 0.0, (1.0,))
    with pytest.raises(ValueError):
        KernelSpec(APPEARANCE, 3.0, (1.0,))
    with pytest.raises(ValueError):
        KernelSpec(SMOOTHNESS, 3.0, (-1.0,))
    with pytest.raises(ValueError):
        DenseCrfProblem(np.zeros((2, 2, 3)), (KernelSpec(SMOOTHNESS, 1.0, (1.0, 1.0)),))
    with pytest.raises(ValueError):
        DenseCrfProblem(np.zeros((2, 2, 1)), ())
    with pytest.raises(ValueError):
        DenseCrfProblem(np.zeros((2, 2, 2)), (KernelSpec(APPEARANCE, 1.0, (1.0,), 1.0),))


# energy

def test_energy_without_pairwise_is_unary_sum(rng):
    u = rng.random((3, 4, 2))
    p = DenseCrfProblem(u, (KernelSpec(SMOOTHNESS, 1.0, (0.0,)),), w0=0.0)
    lab = rng.integers(0, 2, (3, 4))
    assert energy(p, lab) == pytest.approx(u[np.arange(3)[:, None], np.arange(4), lab].sum())


def test_energy_uniform_labeling_has_no_pairwise(rng):
    u = rng.random((3, 3, 2))
    p = DenseCrfProblem(u, (KernelSpec(SMOOTHNESS, 1.0, (5.0,)),), w0=2.0)
    assert energy(p, np.ones((3, 3), int)) == pytest.approx(u[..., 1].sum())


def test_energy_two_by_two_by_hand():
    u = np.array([[[0.1, 0.7], [0.4, 0.2]], [[0.9, 0.3], [0.5, 0.6]]])
    p = DenseCrfProblem(u, (KernelSpec(SMOOTHNESS, 1.0, (0.8,)),), w0=1.5)
    lab = np.array([[0, 1], [1, 1]])
    # pixel (0,0) disagrees with its two edge neighbours (d^2 = 1) and the diagonal (d^2 = 2)
    pair = 1.5 * 0.8 * (2 * math.exp(-0.5) + math.exp(-1.0))
    unary = 0.1 + 0.2 + 0.3 + 0.6
    assert energy(p, lab) == pytest.approx(unary + pair, rel=1e-12)


def test_energy_size_cap():
    p = DenseCrfProblem(np.zeros((65, 64, 2)), ())
    with pytest.raises(ValueError, match="capped"):
        energy(p, np.zeros((65, 64), int))


# brute-force filtering

def test_bruteforce_single_and_identical_pixels():
    k = KernelSpec(APPEARANCE, 1e9, (1.0,), 1.0)
    assert filter_bruteforce(np.ones((1, 1, 1)), k, np.zeros((1, 1, 1))).item() == 0.0
    out = filter_bruteforce(np.array([[[2.0], [5.0]]]), k, np.zeros((1, 2, 1)))
    np.testing.assert_allclose(out.ravel(), [5.0, 2.0], rtol=1e-12)


def test_bruteforce_three_pixels_by_hand():
    v = np.array([[[1.0], [0.0], [0.0]]])
    out = filter_bruteforce(v, KernelSpec(SMOOTHNESS, 1.0, (1.0,)))
    np.testing.assert_allclose(out.ravel(), [0.0, math.exp(-0.5), math.exp(-2.0)], rtol=1e-12)


# fast filtering

def test_fast_spatial_impulse_mass():
    v = np.zeros((32, 32, 1))
    v[16, 16] = 1.0
    k = KernelSpec(SMOOTHNESS, 3.0, (1.0,))
    fast, exact = filter_fast(v, k), filter_bruteforce(v, k)
    assert fast.sum() == pytest.approx(exact.sum(), rel=0.01)


def test_fast_constant_field():
    v = np.ones((24, 24, 1))
    feats = np.zeros((24, 24, 1))
    for k in (KernelSpec(SMOOTHNESS, 3.0, (1.0,)), KernelSpec(APPEARANCE, 5.0, (1.0,), 1.0)):
        fast, exact = filter_fast(v, k, feats), filter_bruteforce(v, k, feats)
        assert np.abs(fast - exact).max() <= 0.01 * exact.max()


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([SMOOTHNESS, APPEARANCE]))
def test_fast_matches_bruteforce(seed, kind):
    rng = np.random.default_rng(seed)
    v = rng.random((32, 32, 2))
    feats = rng.normal(0, 10, (32, 32, 1))
    k = KernelSpec(kind, float(rng.uniform(2, 10)), (1.0,),
                   float(rng.uniform(5, 15)) if kind == APPEARANCE else None)
    assert rel_l2(filter_fast(v, k, feats), filter_bruteforce(v, k, feats)) <= 1e-2


# messages and relaxed energy

def test_relaxed_energy_gradient_by_finite_differences(rng):
    p = oracle_problem(3)
    q = rng.random((3, 3, 2))
    grad = p.unary + pairwise_messages(p, q, exact=True)
    h = 1e-6
    for idx in [(0, 0, 0), (1, 2, 1), (2, 1, 0)]:
        dq = np.zeros_like(q)
        dq[idx] = h
        fd = (relaxed_energy(p, q + dq, exact=True) - relaxed_energy(p, q - dq, exact=True)) / (2 * h)
        assert fd == pytest.approx(grad[idx], rel=1e-6)


def test_relaxed_energy_equals_energy_on_onehot(rng):
    p = oracle_problem(8)
    lab = rng.integers(0, 2, (3, 3))
    assert relaxed_energy(p, np.eye(2)[lab], exact=True) == pytest.approx(energy(p, lab))


# mean field

def test_mean_field_zero_pairwise(rng):
    u = rng.random((4, 4, 3))
    p = DenseCrfProblem(u, (KernelSpec(SMOOTHNESS, 2.0, (0.0,)),), w0=0.0)
    for iters in (1, 4):
        q = mean_field_infer(p, iters, init="uniform").q
        np.testing.assert_allclose(q, softmax(-u, axis=2), atol=1e-6)


def test_mean_field_zero_iterations_returns_init(rng):
    u = rng.random((3, 3, 2))
    p = DenseCrfProblem(u, (KernelSpec(SMOOTHNESS, 1.0, (1.0,)),))
    np.testing.assert_array_equal(mean_field_infer(p, 0).q, softmax(-u, axis=2))
    np.testing.assert_array_equal(mean_field_infer(p, 0, init="uniform").q, np.full((3, 3, 2), 0.5))


def test_mean_field_symmetric_problem_stays_uniform():
    p = DenseCrfProblem(np.zeros((5, 5, 3)), (KernelSpec(SMOOTHNESS, 2.0, (1.0,)),), w0=3.0)
    np.testing.assert_allclose(mean_field_infer(p, 5, init="uniform").q, 1 / 3, atol=1e-12)


def flipped_pixel_problem():
    prob = np.full((3, 3), 0.9)
    prob[1, 1] = 0.3
    return DenseCrfProblem(unary_from_probability(prob), (KernelSpec(SMOOTHNESS, 1.0, (1.0,)),))


def test_mean_field_recovers_map_on_flipped_pixel():
    p = flipped_pixel_problem()
    best, _ = exhaustive_map(p)
    assert best.all()
    np.testing.assert_array_equal(mean_field_infer(p, 5, exact=True).labels(), best)


def test_frank_wolfe_recovers_map_on_flipped_pixel():
    p = flipped_pixel_problem()
    best, _ = exhaustive_map(p)
    np.testing.assert_array_equal(frank_wolfe_infer(p, 5, exact=True).labels(), best)


@pytest.mark.parametrize("solver", ["mf", "fw"])
def test_rows_stay_on_simplex(solver):
    p = oracle_problem(0)
    residuals = []

    def cb(t, q):
        assert q.min() >= 0 and q.max() <= 1
        residuals.append(np.abs(q.sum(axis=2) - 1).max())

    if solver == "mf":
        mean_field_infer(p, 6, callback=cb)
    else:
        frank_wolfe_infer(p, 6, callback=cb)
    assert len(residuals) == 6 and max(residuals) <= 1e-5


@given(st.integers(0, 2 ** 31 - 1), st.permutations([0, 1, 2]))
def test_label_permutation_equivariance(seed, perm):
    rng = np.random.default_rng(seed)
    u = rng.random((4, 4, 3)) * 3
    w = rng.random(3)
    feats = rng.normal(size=(4, 4, 1))

    def build(order):
        ks = (KernelSpec(SMOOTHNESS, 1.5, tuple(w[order])),
              KernelSpec(APPEARANCE, 3.0, tuple(w[order][::-1]), 1.0))
        return DenseCrfProblem(u[..., order], ks, feats, 0.7)

    base = np.arange(3)
    perm = np.asarray(perm)
    for solve in (mean_field_infer, frank_wolfe_infer):
        # permute the appearance weights consistently too
        q0 = solve(build(base), 4).q
        ks = (KernelSpec(SMOOTHNESS, 1.5, tuple(w[perm])),
              KernelSpec(APPEARANCE, 3.0, tuple(w[::-1][perm]), 1.0))
        qp = solve(DenseCrfProblem(u[..., perm], ks, feats, 0.7), 4).q
        np.testing.assert_allclose(qp, q0[..., perm], atol=1e-10)


# Frank-Wolfe

def test_frank_wolfe_zero_pairwise_fixed_point(rng):
    u = rng.random((4, 4, 2)) * 2
    p = DenseCrfProblem(u, (KernelSpec(SMOOTHNESS, 1.0, (0.0,)),), w0=0.0)
    q = frank_wolfe_infer(p, 30, init="uniform").q
    np.testing.assert_allclose(q, softmax(-u, axis=2), atol=1e-2)
    np.testing.assert_allclose(frank_wolfe_infer(p, 3).q, softmax(-u, axis=2), atol=1e-12)
    q = frank_wolfe_infer(p, 3, regularizer=0.5).q
    # from the unary softmax every target is softmax(-u / 0.5), so the iterate heads there
    target = softmax(-u / 0.5, axis=2)
    assert np.abs(q - target).max() < np.abs(softmax(-u, axis=2) - target).max()


def test_frank_wolfe_step_rules():
    assert step_size("harmonic", 0) == 1.0 and step_size(None, 2) == 0.5
    assert step_size(0.3, 7) == 0.3
    with pytest.raises(ValueError):
        step_size(1.5, 0)
    with pytest.raises(ValueError):
        frank_wolfe_infer(oracle_problem(0), 0)


@pytest.mark.parametrize("seed", range(20))
def test_frank_wolfe_never_worse_than_unary_rounding(seed):
    p = oracle_problem(seed, shape=(4, 4))
    lab = frank_wolfe_infer(p, 10, exact=True, track_best=True).labels()
    assert energy(p, lab) <= energy(p, p.unary.argmin(axis=2)) + 1e-12


def test_schedule_validation():
    p = oracle_problem(1)
    with pytest.raises(ValueError, match="schedule"):
        mean_field_infer(p, 3, temperature=[1.0, 0.5])
    with pytest.raises(ValueError):
        frank_wolfe_infer(p, 2, regularizer=[1.0, 0.0])


@pytest.mark.parametrize("seed", range(10))
def test_annealed_solvers_find_the_map(seed):
    p = oracle_problem(1000 + seed)
    best, e_best = exhaustive_map(p)
    e_unary = energy(p, p.unary.argmin(axis=2))
    for solve, opts in ((mean_field_infer, MF_MAP), (frank_wolfe_infer, FW_MAP)):
        lab = solve(p, **opts).labels()
        assert energy(p, lab) <= e_unary + 1e-12
        assert energy(p, lab) >= e_best - 1e-12


# refinement

def test_unary_clamp_is_finite():
    u = unary_from_probability(np.array([[0.0, 1.0]]))
    assert np.isfinite(u).all()
    out = refine(ProbabilityMap(np.array([[0.0, 1.0], [1.0, 0.0]])), Image2D(np.eye(2)))
    assert np.isfinite(out.data).all()


def test_refine_keeps_hard_consistent_map():
    truth = np.zeros((32, 32))
    truth[8:24, 8:24] = 1
    out = refine(ProbabilityMap(truth), Image2D(truth))
    np.testing.assert_array_equal(out.data > 0.5, truth > 0.5)


def test_refine_zero_iterations_is_identity_up_to_clamp():
    prob = np.random.default_rng(0).random((16, 16))
    out = refine(ProbabilityMap(prob), Image2D(prob), config=CrfConfig(iterations=0))
    np.testing.assert_allclose(out.data, prob, atol=1e-6)


def test_refine_shape_mismatch():
    with pytest.raises(ValueError):
        refine(ProbabilityMap(np.zeros((4, 4))), Image2D(np.zeros((4, 5))))
    with pytest.raises(ValueError):
        refine(ProbabilityMap(np.zeros((4, 4))), features=np.zeros((5, 4)))


def test_config_validation():
    with pytest.raises(ValueError):
        CrfConfig(solver="gibbs")
    with pytest.raises(ValueError):
        CrfConfig(iterations=-1)
    d = CrfConfig().to_dict()
    assert d["w_appearance"] == [2e-5, 1e-3]


@pytest.mark.parametrize("solver", ["meanfield", "frankwolfe"])
def test_refine_improves_salt_noise(solver):
    fx = salt_noise_map(0)
    truth = fx.truth.labels
    before = iou(fx.prob.data > 0.5, truth)
    out = refine(fx.prob, fx.image, config=CrfConfig(solver=solver))
    assert iou(out.data > 0.5, truth) > before


def test_refine_accepts_multichannel_features(rng):
    fx = salt_noise_map(1)
    feats = np.stack([fx.features] * 5 + [rng.normal(size=fx.features.shape)], axis=2)
    out = refine(fx.prob, features=feats)
    assert iou(out.data > 0.5, fx.truth.labels) > iou(fx.prob.data > 0.5, fx.truth.labels)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crisp import _kernels

py = _kernels.get_backend("python")
BACKENDS = _kernels.available_backends()


@pytest.fixture(params=BACKENDS)
def impl(request):
    return _kernels.get_backend(request.param)


def test_backend_selected_at_import():
    assert _kernels.BACKEND in BACKENDS
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")


def test_splat_single_point_weights(impl):
    grid = impl.splat(np.array([[0.25, 0.5]]), np.array([[2.0]]), (3, 3)).reshape(3, 3)
    expect = np.zeros((3, 3))
    expect[0, 0], expect[0, 1] = 0.75 * 0.5 * 2, 0.75 * 0.5 * 2
    expect[1, 0], expect[1, 1] = 0.25 * 0.5 * 2, 0.25 * 0.5 * 2
    np.testing.assert_allclose(grid, expect)


def test_splat_conserves_mass_and_slice_is_adjoint(impl, rng):
    shape = (5, 6, 4)
    coords = rng.random((50, 3)) * (np.array(shape) - 1.001)
    vals = rng.normal(size=(50, 2))
    grid = impl.splat(coords, vals, shape)
    np.testing.assert_allclose(grid.sum(axis=0), vals.sum(axis=0), rtol=1e-12)
    g = rng.normal(size=grid.shape)
    lhs = (grid * g).sum()
    rhs = (vals * impl.slice_grid(g, coords, shape)).sum()
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_slice_at_grid_points(impl, rng):
    grid = rng.normal(size=(12, 1))
    coords = np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 1.0]])
    out = impl.slice_grid(grid, coords, (4, 3))[:, 0]
    np.testing.assert_allclose(out, grid[[0, 5, 7], 0])


def test_gauss_pairwise_against_loop(impl, rng):
    f = rng.normal(size=(30, 2))
    v = rng.normal(size=(30, 2))
    expect = np.zeros_like(v)
    for i in range(30):
        for j in range(30):
            if i != j:
                expect[i] += np.exp(-0.5 * np.sum((f[i] - f[j]) ** 2)) * v[j]
    np.testing.assert_allclose(impl.gauss_pairwise(f, v, block=7), expect, rtol=1e-12, atol=1e-12)


def test_hill_climb_reaches_peak(impl):
    yy, xx = np.mgrid[:20, :20]
    score = -((yy - 13) ** 2 + (xx - 6) ** 2).astype(float)
    ys, xs = impl.hill_climb(score, np.array([0, 19]), np.array([19, 0]), 2)
    assert ys.tolist() == [13, 13] and xs.tolist() == [6, 6]


@given(st.integers(0, 2 ** 31 - 1))
def test_backends_agree(seed):
    if "cython" not in BACKENDS:
        pytest.skip("compiled kernels unavailable")
    cy = _kernels.get_backend("cython")
    rng = np.random.default_rng(seed)
    shape = (4, 5, 3)
    coords = rng.random((40, 3)) * (np.array(shape) - 1.001)
    vals = rng.normal(size=(40, 2))
    a, b = py.splat(coords, vals, shape), cy.splat(coords, vals, shape)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(py.slice_grid(a, coords, shape), cy.slice_grid(a, coords, shape),
                               rtol=1e-12, atol=1e-12)
    f = rng.normal(size=(25, 3))
    np.testing.assert_allclose(py.gauss_pairwise(f, vals[:25]), cy.gauss_pairwise(f, vals[:25]),
                               rtol=1e-10, atol=1e-12)
    score = rng.random((15, 15))
    ys, xs = rng.integers(0, 15, 6), rng.integers(0, 15, 6)
    for u, v in zip(py.hill_climb(score, ys, xs, 1), cy.hill_climb(score, ys, xs, 1)):
        np.testing.assert_array_equal(u, v)

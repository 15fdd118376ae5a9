import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparseoos import kernels
from sparseoos.kernels import (
    Ball,
    Gaussian,
    IsolatedPointError,
    Knn,
    NormalizedHeat,
    bind,
    cross_row,
    eval_gaussian,
    gram,
    heat_weight,
)


def test_gaussian_examples():
    assert eval_gaussian([1.0, 2.0], [1.0, 2.0], 0.7) == 1.0
    # distance 5, sigma 5: exp(-25/25)
    assert eval_gaussian([0, 0], [3, 4], 5.0) == pytest.approx(np.exp(-1), rel=1e-14)
    a, b = np.array([0.3, -1.0]), np.array([2.0, 0.1])
    assert eval_gaussian(a, b, 1.3) == eval_gaussian(b, a, 1.3)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_gaussian([0, 0], [0, 0, 0], 1.0)
    with pytest.raises(ValueError):
        heat_weight([0], [0, 0], 1.0, 1.0)


def test_heat_weight_examples():
    assert heat_weight([2.0], [2.0], 0.3, 0.1) == 1.0
    assert heat_weight([0.0], [2.0], 1.0, 1.0) == 0.0
    assert heat_weight([0.0], [1.0], 1.0, 2.0) == pytest.approx(np.exp(-1), rel=1e-14)


def test_bind_single_point():
    bk = bind(NormalizedHeat(1.0, Ball(1.0)), np.array([[0.0, 0.0]]))
    np.testing.assert_array_equal(bk.degrees, [1.0])


def test_bind_identical_points():
    bk = bind(NormalizedHeat(1.0, Ball(1.0)), np.zeros((2, 2)))
    np.testing.assert_array_equal(bk.degrees, [2.0, 2.0])
    np.testing.assert_allclose(gram(bk), [[0.5, 0.5], [0.5, 0.5]], rtol=1e-15)


def test_bind_gaussian_has_no_degrees():
    assert bind(Gaussian(1.0), np.zeros((3, 1))).degrees is None


def test_bind_knn_k_too_large():
    with pytest.raises(ValueError):
        bind(NormalizedHeat(1.0, Knn(3)), np.zeros((3, 1)))


def test_spec_validation():
    with pytest.raises(ValueError):
        Gaussian(0.0)
    with pytest.raises(ValueError):
        NormalizedHeat(-1.0, Knn(2))
    with pytest.raises(ValueError):
        Ball(0.0)


def test_gaussian_gram_diag_and_symmetry():
    pts = np.random.default_rng(0).standard_normal((15, 4))
    k = gram(bind(Gaussian(1.5), pts))
    np.testing.assert_array_equal(np.diag(k), 1.0)
    assert np.array_equal(k, k.T)


def test_cross_row_far_point_underflows():
    pts = np.random.default_rng(1).standard_normal((5, 2))
    row = cross_row(bind(Gaussian(1.0), pts), np.array([1e3, 1e3]))
    assert np.all(row == 0.0)


def test_isolated_query():
    pts = np.array([[0.0], [1.0]])
    bk = bind(NormalizedHeat(1.0, Ball(1.5)), pts)
    with pytest.raises(IsolatedPointError):
        cross_row(bk, np.array([10.0]))


def test_far_apart_training_points_keep_self_weight():
    # the self-weight keeps every training degree >= 1 even with no neighbors
    bk = bind(NormalizedHeat(1.0, Ball(0.1)), np.array([[0.0], [5.0]]))
    np.testing.assert_array_equal(bk.degrees, [1.0, 1.0])
    np.testing.assert_array_equal(gram(bk), np.eye(2))


specs = st.sampled_from(
    [Gaussian(1.0), NormalizedHeat(2.0, Ball(1.5)), NormalizedHeat(0.7, Knn(3)), NormalizedHeat(5.0, Knn(1))]
)


@settings(max_examples=40, deadline=None)
@given(specs, st.integers(5, 25), st.integers(0, 10_000))
def test_cross_row_reproduces_gram_rows(spec, n, seed):
    pts = np.random.default_rng(seed).standard_normal((n, 3))
    bk = bind(spec, pts)
    k = gram(bk)
    assert np.array_equal(k, k.T)
    for j in range(n):
        np.testing.assert_allclose(cross_row(bk, pts[j]), k[j], rtol=0, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 100), st.integers(0, 10_000), st.floats(0.2, 5.0))
def test_gaussian_gram_psd(n, seed, sigma):
    pts = np.random.default_rng(seed).standard_normal((n, 2))
    w = np.linalg.eigvalsh(gram(bind(Gaussian(sigma), pts)))
    assert w.min() >= -1e-8 * w.max()


def test_restrict_heat_keeps_full_degrees():
    pts = np.random.default_rng(4).standard_normal((12, 2))
    bk = bind(NormalizedHeat(1.0, Knn(3)), pts)
    sub = bk.restrict([2, 5])
    x = np.array([0.1, -0.2])
    np.testing.assert_array_equal(cross_row(sub, x), cross_row(bk, x)[[2, 5]])
    np.testing.assert_array_equal(gram(sub), gram(bk)[np.ix_([2, 5], [2, 5])])


def test_spec_dict_round_trip():
    for spec in [Gaussian(4.0), NormalizedHeat(10.0, Knn(9)), NormalizedHeat(0.5, Ball(2.5))]:
        assert kernels.spec_from_dict({k: str(v) for k, v in kernels.spec_to_dict(spec).items()}) == spec

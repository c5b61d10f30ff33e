import numpy as np
import pytest

from bmoo.gp import (
    GpConfig,
    GpHyperparameters,
    build_model,
    fit_all,
    fit_map,
    matern52,
    predict,
    predict_batch,
)
from bmoo.problems import get_problem


def _kriging_oracle(X, y, Xs, sigma2, theta, nugget):
    """Direct ordinary-kriging formulas with an explicit inverse."""

    def k(A, B):
        D = np.sqrt((((A[:, None, :] - B[None, :, :]) / theta) ** 2).sum(-1))
        return sigma2 * (1 + np.sqrt(5) * D + 5 * D**2 / 3) * np.exp(-np.sqrt(5) * D)

    K = k(X, X) + nugget * np.eye(len(X))
    Ki = np.linalg.inv(K)
    one = np.ones(len(X))
    beta = one @ Ki @ y / (one @ Ki @ one)
    ks = k(Xs, X)
    mean = beta + ks @ Ki @ (y - beta)
    u = 1 - ks @ Ki @ one
    var = sigma2 - np.einsum("ij,jk,ik->i", ks, Ki, ks) + u**2 / (one @ Ki @ one)
    return mean, var


def test_matern_examples():
    assert matern52(0.0) == pytest.approx(1.0)
    assert matern52(1e3) == pytest.approx(0.0, abs=1e-12)
    assert matern52(1.0) == pytest.approx((1 + np.sqrt(5) + 5 / 3) * np.exp(-np.sqrt(5)), rel=1e-12)
    assert matern52(1.0) == pytest.approx(0.52399, abs=1e-5)


def test_constant_data():
    X = np.random.default_rng(0).random((6, 2))
    m = fit_map(X, np.full(6, 3.5))
    mean, var = predict_batch(m, np.random.default_rng(1).random((20, 2)))
    np.testing.assert_allclose(mean, 3.5)


def test_symmetric_data_zero_mean_coefficient():
    X = np.array([[0.0], [1.0]])
    m = fit_map(X, np.array([-2.0, 2.0]), x_low=[0.0], x_upp=[1.0])
    assert m.mean_coefficient == pytest.approx(0.0, abs=1e-10)


def test_against_direct_oracle_linear_1d():
    X = np.linspace(0, 1, 5)[:, None]
    y = 2 * X[:, 0] + 1
    hyper = GpHyperparameters(sigma2=1.7, theta=np.array([0.6]), nugget=1e-6 * 1.7)
    m = build_model(hyper, X, y, x_low=[0.0], x_upp=[1.0])
    xs = np.array([[0.125], [0.5 + 1 / 3]])
    mean, var = predict_batch(m, xs)
    # the model works on standardized outputs: rescale the oracle inputs
    ys = (y - m.y_mean) / m.y_std
    om, ov = _kriging_oracle(X, ys, xs, hyper.sigma2 / m.y_std**2, hyper.theta, hyper.nugget / m.y_std**2)
    np.testing.assert_allclose(mean, m.y_mean + m.y_std * om, rtol=1e-6)
    np.testing.assert_allclose(var, m.y_std**2 * ov, rtol=1e-5, atol=1e-12)


def test_two_point_hand_solved():
    # two points, unit variance, theta = 1: R = [[1, r], [r, 1]], beta = mean(y)
    X = np.array([[0.0], [0.5]])
    y = np.array([0.0, 1.0])
    m = build_model(GpHyperparameters(1.0, np.array([1.0]), 0.0), X, y, x_low=[0.0], x_upp=[1.0])
    r = matern52(0.5)
    xs = np.array([[1.0]])
    k1, k2 = matern52(1.0), matern52(0.5)
    beta = 0.5
    w = np.linalg.solve(np.array([[1, r], [r, 1]]), np.array([k1, k2]))
    mean, _ = predict_batch(m, xs)
    assert m.mean_coefficient == pytest.approx(beta, abs=1e-9)
    assert mean[0] == pytest.approx(beta + w @ (y - beta), rel=1e-6)


def test_interpolation_and_far_field():
    rng = np.random.default_rng(0)
    toy = get_problem("toy")
    X = toy.x_low + rng.random((20, 2)) * toy.span
    y = toy.evaluate_batch(X)[0][:, 0]
    m = fit_map(X, y, x_low=toy.x_low, x_upp=toy.x_upp, rng=rng)
    mean, var = predict_batch(m, X)
    if m.hyper.nugget <= 1e-6 * m.hyper.sigma2 * (1 + 1e-9):
        assert np.max(np.abs(mean - y)) <= 1e-3 * np.sqrt(m.hyper.sigma2)
    assert np.all(var <= 1e-3 * m.hyper.sigma2)
    far = predict(m, toy.x_low + 1e4 * toy.span)
    assert far.mean == pytest.approx(m.mean_coefficient, rel=1e-6)
    assert far.var >= m.hyper.sigma2 * (1 - 1e-9)


def test_loo_sanity_band():
    rng = np.random.default_rng(3)
    toy = get_problem("toy")
    X = toy.x_low + rng.random((30, 2)) * toy.span
    y = toy.evaluate_batch(X)[1][:, 0]  # smooth Branin-type constraint
    m = fit_map(X, y, x_low=toy.x_low, x_upp=toy.x_upp, rng=rng)
    z = []
    for i in range(30):
        keep = np.arange(30) != i
        mi = build_model(m.hyper, X[keep], y[keep], toy.x_low, toy.x_upp)
        mu, v = predict_batch(mi, X[i : i + 1])
        z.append((y[i] - mu[0]) / np.sqrt(v[0]))
    assert 0.2 <= np.var(z) <= 5


def test_continuity():
    rng = np.random.default_rng(4)
    X = rng.random((12, 3))
    y = np.sin(3 * X).sum(1)
    m = fit_map(X, y, rng=rng)
    x = rng.random((5, 3))
    a, _ = predict_batch(m, x)
    b, _ = predict_batch(m, x * (1 + 1e-7))
    assert np.max(np.abs(a - b)) < 1e-4


def test_translation_invariance():
    rng = np.random.default_rng(5)
    X = rng.random((10, 2))
    y = np.cos(4 * X[:, 0]) + X[:, 1] ** 2
    hyper = GpHyperparameters(2.0, np.array([0.3, 0.5]), 2e-6)
    m1 = build_model(hyper, X, y)
    m2 = build_model(hyper, X, y + 7.0)
    xs = rng.random((30, 2))
    a, va = predict_batch(m1, xs)
    b, vb = predict_batch(m2, xs)
    np.testing.assert_allclose(b, a + 7.0, atol=1e-9)
    np.testing.assert_allclose(vb, va, atol=1e-10)


def test_independent_outputs():
    rng = np.random.default_rng(6)
    X = rng.random((15, 2))
    Y = np.column_stack([X.sum(1), np.sin(5 * X[:, 0])])
    Y2 = Y.copy()
    Y2[:, 0] = 3 * Y[:, 0] ** 2
    ms = fit_all(X, Y, rng=np.random.default_rng(0))
    ms2 = fit_all(X, Y2, rng=np.random.default_rng(0))
    xs = rng.random((10, 2))
    # changing one output leaves the model of the other unchanged
    np.testing.assert_array_equal(predict_batch(ms[1], xs)[0], predict_batch(ms2[1], xs)[0])


def test_positive_definite_with_duplicates():
    X = np.array([[0.1, 0.2], [0.1, 0.2], [0.5, 0.5], [0.9, 0.3]])
    y = np.array([1.0, 1.0, 2.0, 0.5])
    m = fit_map(X, y, config=GpConfig(n_starts=2))
    mean, var = predict_batch(m, X)
    assert np.all(np.isfinite(mean)) and np.all(var >= 0)

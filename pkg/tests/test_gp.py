from __future__ import annotations

import math

import numpy as np
import pytest

from afsched.gp import (
    GpFitError,
    KernelParams,
    build_model,
    fit,
    kernel_matern52,
    log_marginal_likelihood,
    predict,
    predict_batch,
)


def _params(lengthscales, signal_variance=1.0, noise_variance=1e-6) -> KernelParams:
    return KernelParams(
        np.log(np.asarray(lengthscales, dtype=float)),
        math.log(signal_variance),
        math.log(noise_variance),
    )


def _random_problem(rng, n, d):
    x = rng.random((n, d))
    y = rng.standard_normal(n)
    params = _params(rng.uniform(0.2, 2.0, d), rng.uniform(0.5, 3.0), rng.uniform(1e-4, 1e-2))
    return x, y, params


def _dense_posterior(params, x, y, query):
    """Oracle: posterior via a plain dense solve, no Cholesky reuse."""
    n = x.shape[0]
    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if y_std < 1e-12:
        y_std = 1.0
    y_s = (y - y_mean) / y_std
    k = np.array([[kernel_matern52(x[i], x[j], params) for j in range(n)] for i in range(n)])
    k_noisy = k + params.noise_variance * np.eye(n)
    k_star = np.array([kernel_matern52(query, x[i], params) for i in range(n)])
    mean_s = k_star @ np.linalg.solve(k_noisy, y_s)
    var_s = (
        params.signal_variance
        + params.noise_variance
        - k_star @ np.linalg.solve(k_noisy, k_star)
    )
    return y_mean + y_std * mean_s, max(var_s, 0.0) * y_std**2


def test_kernel_at_zero_distance_is_signal_variance() -> None:
    params = _params([0.5, 0.5], signal_variance=1.0)
    a = np.array([0.3, 0.7])
    assert kernel_matern52(a, a, params) == pytest.approx(1.0, abs=1e-15)


def test_kernel_at_one_lengthscale() -> None:
    # r = 1: value is (1 + sqrt(5) + 5/3) exp(-sqrt(5)).
    expected = (1.0 + math.sqrt(5.0) + 5.0 / 3.0) * math.exp(-math.sqrt(5.0))
    params = _params([0.25])
    value = kernel_matern52(np.array([0.0]), np.array([0.25]), params)
    assert value == pytest.approx(expected, abs=1e-15)
    assert value == pytest.approx(0.52399, abs=1e-5)


def test_kernel_symmetry_and_dim_mismatch() -> None:
    rng = np.random.default_rng(0)
    params = _params(rng.uniform(0.1, 1.0, 3))
    a, b = rng.random(3), rng.random(3)
    assert kernel_matern52(a, b, params) == kernel_matern52(b, a, params)
    with pytest.raises(ValueError):
        kernel_matern52(np.zeros(2), np.zeros(2), params)


def test_lml_single_point_closed_form() -> None:
    # k(x,x) + noise = 0.9 + 0.1 = 1 and y = 0, so only the constant survives.
    params = _params([1.0], signal_variance=0.9, noise_variance=0.1)
    value, _ = log_marginal_likelihood(params, np.array([[0.5]]), np.array([0.0]))
    assert value == pytest.approx(-0.5 * math.log(2.0 * math.pi), abs=1e-12)
    assert value == pytest.approx(-0.91894, abs=1e-5)


def test_lml_zero_targets_drop_the_data_term() -> None:
    rng = np.random.default_rng(3)
    x = rng.random((5, 2))
    params = _params([0.4, 0.6], 1.5, 1e-3)
    value, _ = log_marginal_likelihood(params, x, np.zeros(5))
    k = np.array([[kernel_matern52(x[i], x[j], params) for j in range(5)] for i in range(5)])
    chol = np.linalg.cholesky(k + params.noise_variance * np.eye(5))
    expected = -float(np.sum(np.log(np.diag(chol)))) - 2.5 * math.log(2.0 * math.pi)
    assert value == pytest.approx(expected, abs=1e-10)


def test_lml_gradient_matches_central_differences() -> None:
    rng = np.random.default_rng(7)
    x, y, params = _random_problem(rng, 6, 3)
    _, grad = log_marginal_likelihood(params, x, y)
    theta = params.to_vector()
    h = 1e-5
    for j in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[j] += h
        down[j] -= h
        v_up, _ = log_marginal_likelihood(KernelParams.from_vector(up), x, y)
        v_down, _ = log_marginal_likelihood(KernelParams.from_vector(down), x, y)
        fd = (v_up - v_down) / (2.0 * h)
        assert abs(grad[j] - fd) / max(abs(fd), 1e-6) < 1e-4


def test_fit_handles_duplicate_inputs_with_distinct_targets() -> None:
    x = np.array([[0.4, 0.4], [0.4, 0.4]])
    y = np.array([0.0, 1.0])
    model = fit(x, y, restarts=4, rng=0)
    # The only consistent explanation is observation noise.
    assert model.params.noise_variance > 1e-2


def test_fit_constant_targets_predicts_the_constant() -> None:
    x = np.linspace(0.0, 1.0, 6)[:, None]
    y = np.full(6, 3.25)
    model = fit(x, y, restarts=4, rng=1)
    assert model.y_std == 1.0
    for q in (0.05, 0.31, 0.99):
        assert predict(model, np.array([q])).mean == pytest.approx(3.25, abs=1e-9)


def test_fit_interpolates_linear_data() -> None:
    x = np.linspace(0.0, 1.0, 5)[:, None]
    y = x.ravel().copy()
    model = fit(x, y, restarts=8, rng=42)
    for xi, yi in zip(x, y):
        post = predict(model, xi)
        assert abs(post.mean - yi) < 1e-3
        assert abs(post.mean - yi) < 1e-3 * model.y_std


def test_predict_reverts_to_prior_far_from_data() -> None:
    params = _params([0.02, 0.02], signal_variance=2.0, noise_variance=0.5)
    x = np.random.default_rng(5).random((8, 2)) * 0.05
    y = np.array([1.0, 2.0, 0.5, 1.5, 2.5, 0.8, 1.2, 1.8])
    model = build_model(x, y, params)
    post = predict(model, np.array([0.95, 0.95]))
    prior_std = math.sqrt(2.0 + 0.5) * model.y_std
    assert post.mean == pytest.approx(model.y_mean, rel=1e-3, abs=1e-3)
    assert post.std == pytest.approx(prior_std, rel=1e-3)


def test_conditioning_reduces_variance_at_observed_point() -> None:
    params = _params([0.3], signal_variance=1.0, noise_variance=1e-4)
    model = build_model(np.array([[0.5]]), np.array([0.7]), params)
    post = predict(model, np.array([0.5]))
    prior_std = math.sqrt(1.0 + 1e-4) * model.y_std
    assert post.std < prior_std


def test_posterior_matches_dense_solve_oracle() -> None:
    rng = np.random.default_rng(17)
    for _ in range(5):
        n = int(rng.integers(3, 20))
        d = int(rng.integers(1, 5))
        x, y, params = _random_problem(rng, n, d)
        model = build_model(x, y, params)
        for _ in range(4):
            query = rng.random(d)
            post = predict(model, query)
            mean_ref, var_ref = _dense_posterior(params, x, y, query)
            assert abs(post.mean - mean_ref) < 1e-8
            assert abs(post.std**2 - var_ref) < 1e-8


def test_standardized_variance_bounded_by_prior() -> None:
    rng = np.random.default_rng(19)
    x, y, params = _random_problem(rng, 12, 3)
    model = build_model(x, y, params)
    queries = rng.random((200, 3))
    _, stds = predict_batch(model, queries)
    assert np.all(stds >= 0.0)
    var_standardized = (stds / model.y_std) ** 2
    assert np.all(var_standardized <= params.signal_variance + params.noise_variance + 1e-8)


def test_cholesky_reconstructs_noisy_kernel() -> None:
    rng = np.random.default_rng(23)
    x, y, params = _random_problem(rng, 10, 2)
    model = build_model(x, y, params)
    n = x.shape[0]
    k = np.array([[kernel_matern52(x[i], x[j], params) for j in range(n)] for i in range(n)])
    k_noisy = k + params.noise_variance * np.eye(n)
    recon = model.chol @ model.chol.T
    rel = np.linalg.norm(recon - k_noisy) / np.linalg.norm(k_noisy)
    assert rel < 1e-8


def test_fit_is_deterministic_in_the_seed() -> None:
    rng = np.random.default_rng(29)
    x = rng.random((9, 2))
    y = np.sin(3.0 * x[:, 0]) + x[:, 1]
    a = fit(x, y, restarts=5, rng=1234)
    b = fit(x, y, restarts=5, rng=1234)
    assert np.array_equal(a.params.log_lengthscales, b.params.log_lengthscales)
    assert a.params.log_signal_variance == b.params.log_signal_variance
    assert a.params.log_noise_variance == b.params.log_noise_variance


def test_fit_input_validation() -> None:
    with pytest.raises(ValueError):
        fit(np.array([[0.5]]), np.array([1.0]), rng=0)  # n < 2
    with pytest.raises(ValueError):
        fit(np.array([[0.1], [0.2]]), np.array([1.0, math.nan]), rng=0)
    with pytest.raises(ValueError):
        fit(np.array([[0.1], [3.5]]), np.array([1.0, 2.0]), rng=0)  # outside unit cube


def test_noise_floor_is_enforced() -> None:
    with pytest.raises(ValueError):
        KernelParams(np.zeros(1), 0.0, math.log(1e-12))


def test_chol_failure_reports_jitter() -> None:
    # A wildly non-PSD "kernel" cannot be rescued by any jitter level.
    from afsched.gp import _chol_with_jitter

    bad = np.array([[1.0, 5.0], [5.0, 1.0]])
    with pytest.raises(GpFitError) as info:
        _chol_with_jitter(bad)
    assert info.value.jitter == pytest.approx(1e-4)

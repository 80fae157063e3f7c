import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinuq.estimators import (
    effective_lambda,
    error_norm,
    hierarchical_estimate,
    mlmc_estimate,
    mscv_estimate,
    multi_cv_estimate,
    multi_cv_optimal,
    optimal_lambda,
    prolong_piecewise_constant,
    simple_mc,
    two_cv_closed_form,
)


def test_simple_mc_known_values():
    r = simple_mc(np.array([1.0, 2.0, 3.0, 4.0]))
    assert r.estimate == 2.5
    assert r.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)


def test_simple_mc_rejects_empty():
    with pytest.raises(ValueError):
        simple_mc(np.array([]))


def test_mc_convergence_rate():
    # RMS error of the sample mean decays like M^(-1/2)
    rng = np.random.default_rng(7)
    Ms = [100, 1000, 10000]
    rms = []
    for M in Ms:
        errs = [np.mean(np.exp(rng.uniform(0, 1, M))) - (np.e - 1.0)
                for _ in range(100)]
        rms.append(np.sqrt(np.mean(np.square(errs))))
    slope = np.polyfit(np.log(Ms), np.log(rms), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.1)


def test_optimal_lambda_self_control():
    f = np.random.default_rng(0).standard_normal(500)
    d = optimal_lambda(f, f)
    assert d.lam == pytest.approx(1.0, abs=1e-12)
    assert d.rho == pytest.approx(1.0, abs=1e-12)
    assert d.residual_var == pytest.approx(0.0, abs=1e-12)


def test_optimal_lambda_known_regression():
    rng = np.random.default_rng(1)
    g = rng.standard_normal(200000)
    f = 2.0 * g + 0.5 * rng.standard_normal(200000)
    d = optimal_lambda(f, g)
    assert d.lam == pytest.approx(2.0, abs=0.02)
    # residual variance is the noise variance 0.25
    assert d.residual_var == pytest.approx(0.25, rel=0.05)


def test_optimal_lambda_degenerate_control():
    f = np.random.default_rng(2).standard_normal(100)
    d = optimal_lambda(f, np.full(100, 3.0))
    assert d.degenerate
    assert d.lam == 0.0


def test_mscv_zero_lambda_is_simple_mc():
    rng = np.random.default_rng(3)
    f = rng.standard_normal((50, 7))
    g = rng.standard_normal((50, 7))
    r = mscv_estimate(f, g, np.zeros(7), 0.0)
    assert np.array_equal(r.estimate, simple_mc(f).estimate)


def test_mscv_exact_control_removes_all_variance():
    # control variate identical to f with exactly known mean: zero error
    rng = np.random.default_rng(4)
    f = rng.standard_normal(300) + 5.0
    true_mean = 5.0
    r = mscv_estimate(f, f, true_mean, 1.0)
    assert r.estimate == pytest.approx(true_mean, abs=1e-12)


def test_mscv_variance_reduction():
    rng = np.random.default_rng(5)
    reps_mc, reps_cv = [], []
    for rep in range(200):
        r = np.random.default_rng(rep)
        z = r.uniform(0, 1, 20)
        f = np.sin(2 * z) + 0.05 * z**4
        g = np.sin(2 * z)
        g_mean = 0.5 * (1.0 - np.cos(2.0))
        lam = optimal_lambda(f, g).lam
        reps_mc.append(simple_mc(f).estimate)
        reps_cv.append(mscv_estimate(f, g, g_mean, lam).estimate)
    assert np.var(reps_cv) < 0.01 * np.var(reps_mc)


def test_effective_lambda_scaling():
    assert effective_lambda(1.0, 10, 90) == pytest.approx(0.9)
    assert effective_lambda(0.5, 100, 100) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        effective_lambda(1.0, 0, 10)


def test_two_cv_closed_form_matches_solve():
    rng = np.random.default_rng(6)
    for _ in range(5):
        g1 = rng.standard_normal(1000)
        g2 = 0.3 * g1 + rng.standard_normal(1000)
        f = g1 + 2.0 * g2 + 0.1 * rng.standard_normal(1000)
        lam_cf = two_cv_closed_form(f, g1, g2)
        lam_sv, diag = multi_cv_optimal(f, [g1, g2])
        assert np.max(np.abs(lam_cf - lam_sv)) <= 1e-12
        assert not diag["regularized"]


def test_multi_cv_regularizes_collinear_controls():
    rng = np.random.default_rng(8)
    g = rng.standard_normal(500)
    f = g + 0.1 * rng.standard_normal(500)
    lam, diag = multi_cv_optimal(f, [g, g.copy()])
    assert diag["regularized"]
    assert np.all(np.isfinite(lam))


def test_multi_cv_estimate_reduces_error():
    rng = np.random.default_rng(9)
    z = rng.uniform(0, 1, 40)
    f = z**3
    g1, g2 = z, z**2
    lam = two_cv_closed_form(f, g1, g2)
    r = multi_cv_estimate(f, [g1, g2], [0.5, 1.0 / 3.0], lam)
    assert abs(r.estimate - 0.25) < abs(np.mean(f) - 0.25)


def test_hierarchical_counts_must_decrease():
    f1 = np.zeros(10)
    with pytest.raises(ValueError):
        hierarchical_estimate(f1, [(np.zeros(10), np.zeros(10))])


def test_hierarchical_unit_mode_telescopes():
    # unit weights: estimate = E[f1] + E[f2 - f1] exactly
    rng = np.random.default_rng(10)
    f1_0 = rng.standard_normal(50)
    f1_1 = rng.standard_normal(20)
    f2_1 = f1_1 + 0.1
    r = hierarchical_estimate(f1_0, [(f1_1, f2_1)], mode="unit")
    expect = np.mean(f1_0) + np.mean(f2_1 - f1_1)
    assert r.estimate == pytest.approx(expect, abs=1e-14)


def test_hierarchical_quasi_optimal_weights_recorded():
    rng = np.random.default_rng(11)
    z = rng.uniform(0, 1, 400)
    zc = rng.uniform(0, 1, 40)
    r = hierarchical_estimate(np.sin(z), [(np.sin(zc), np.sin(zc) + 0.01 * zc**2)])
    lam_hat = r.diagnostics["lambda_hat"]
    assert lam_hat.shape == (1,)
    assert lam_hat[0] == pytest.approx(1.0, abs=0.05)


def test_prolong_piecewise_constant():
    out = prolong_piecewise_constant(np.array([1.0, 2.0]), 2, (0,))
    assert np.array_equal(out, [1.0, 1.0, 2.0, 2.0])
    out2 = prolong_piecewise_constant(np.ones((2, 3)), 3, (0,))
    assert out2.shape == (6, 3)


def test_mlmc_single_level_is_simple_mc():
    def solver(h, z):
        return np.full(4, z)

    def zs(level, count):
        return np.random.default_rng(99).standard_normal(count)

    r = mlmc_estimate(solver, 1, [10], zs)
    assert np.allclose(r.estimate, np.mean(zs(0, 10)))


def test_mlmc_exact_for_level_independent_model():
    # if every level computes the same answer, corrections vanish exactly
    def solver(h, z):
        return np.full(4 * 2 ** (h - 1), z**2)

    def zs(level, count):
        return np.random.default_rng(level).uniform(0, 1, count)

    r = mlmc_estimate(solver, 3, [100, 40, 10], zs, mode="unit")
    assert np.allclose(r.estimate, np.mean(zs(0, 100) ** 2), atol=1e-14)


def test_error_norm_values():
    e = np.array([[1.0, -1.0], [2.0, 0.0]])
    assert error_norm(e, 0.0, "Linf") == 2.0
    assert error_norm(e, 0.0, "L1x", dx=0.5) == pytest.approx(1.0)
    assert error_norm(e, 0.0, "L1x_L2w", dx=0.5) == pytest.approx(1.0)
    l2l1 = 0.5 * (np.sqrt(2.5) + np.sqrt(0.5))
    assert error_norm(e, 0.0, "L2w_L1x", dx=0.5) == pytest.approx(l2l1)
    with pytest.raises(ValueError):
        error_norm(np.ones(3), 0.0, "L2w_L1x")
    with pytest.raises(ValueError):
        error_norm(np.ones(3), 0.0, "bogus")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10000))
def test_norm_ordering_property(seed):
    # mixed-norm ordering from the Minkowski integral inequality
    e = np.random.default_rng(seed).standard_normal((5, 8))
    a = error_norm(e, 0.0, "L1x_L2w", dx=0.125)
    b = error_norm(e, 0.0, "L2w_L1x", dx=0.125)
    assert a <= b + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10000))
def test_optimal_lambda_never_increases_variance(seed):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal(400)
    f = rng.uniform(0.2, 2.0) * g + rng.standard_normal(400)
    d = optimal_lambda(f, g)
    corrected = f - d.lam * g
    assert np.var(corrected, ddof=1) <= np.var(f, ddof=1) + 1e-12

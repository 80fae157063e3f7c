"""Monte Carlo and control-variate estimators.

All estimators operate on paired samples: the z-sample vector is drawn once
per experiment and reused across the full model and every control variate
(common random numbers), which is what makes the covariances exploitable.
Sample arrays have the sample index first; trailing axes are field points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEGENERATE_VAR_REL = 1e-14
ILL_CONDITIONED = 1e12


@dataclass
class SampleEnsemble:
    """Paired samples sharing one z vector."""

    z: np.ndarray
    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if len(self.z) != len(self.values):
            raise ValueError("one value field per z sample required")

    @property
    def count(self):
        return len(self.z)


@dataclass
class EstimatorReport:
    """Estimator output with variance/correlation diagnostics."""

    estimate: np.ndarray
    std_error: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


@dataclass
class CvDiagnostics:
    """Optimal control-variate weight and the quantities behind it."""

    lam: np.ndarray | float
    var_f: np.ndarray | float
    var_cv: np.ndarray | float
    cov: np.ndarray | float
    rho: np.ndarray | float
    residual_var: np.ndarray | float
    degenerate: bool = False


def _values(samples):
    if isinstance(samples, SampleEnsemble):
        return samples.values
    return np.asarray(samples, dtype=float)


def simple_mc(samples) -> EstimatorReport:
    """Plain sample-mean estimator with its sample standard deviation."""
    u = _values(samples)
    if len(u) == 0:
        raise ValueError("empty sample ensemble")
    mean = np.mean(u, axis=0)
    std = np.std(u, axis=0, ddof=1) if len(u) > 1 else np.zeros_like(mean)
    return EstimatorReport(estimate=mean, std_error=std / np.sqrt(len(u)),
                           diagnostics={"sample_std": std},
                           meta={"M": len(u), "estimator": "simple_mc"})


def _cov_var(f, g, pointwise):
    """Unbiased sample covariance/variances, aggregated over field points
    unless pointwise."""
    M = len(f)
    df = f - np.mean(f, axis=0)
    dg = g - np.mean(g, axis=0)
    if pointwise:
        axis = 0
    else:
        axis = tuple(range(df.ndim))
    cov = np.sum(df * dg, axis=axis) / (M - 1)
    var_f = np.sum(df * df, axis=axis) / (M - 1)
    var_g = np.sum(dg * dg, axis=axis) / (M - 1)
    return cov, var_f, var_g


def optimal_lambda(f_samples, cv_samples, pointwise=False) -> CvDiagnostics:
    """Variance-minimizing weight lam = Cov(f, cv) / Var(cv) from paired samples.

    Scalar per quantity of interest by default (covariances aggregated over
    the field); pointwise=True gives the per-point weight field. A control
    variate with (numerically) zero variance is flagged and gets lam = 0.
    """
    f = _values(f_samples)
    g = _values(cv_samples)
    if f.shape != g.shape:
        raise ValueError("full-model and control-variate samples must be paired")
    if len(f) < 2:
        return CvDiagnostics(lam=0.0, var_f=0.0, var_cv=0.0, cov=0.0, rho=0.0,
                             residual_var=0.0, degenerate=True)
    cov, var_f, var_g = _cov_var(f, g, pointwise)
    scale = max(float(np.max(np.abs(g))), 1.0)
    floor = DEGENERATE_VAR_REL * scale**2
    degenerate = bool(np.all(var_g <= floor))
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(var_g > floor, cov / np.where(var_g > floor, var_g, 1.0), 0.0)
        denom = var_f * var_g
        rho = np.where(denom > 0, cov / np.sqrt(np.where(denom > 0, denom, 1.0)), 0.0)
    residual = (1.0 - rho**2) * var_f
    if not pointwise:
        lam, rho, residual = float(lam), float(rho), float(residual)
        var_f, var_g, cov = float(var_f), float(var_g), float(cov)
    return CvDiagnostics(lam=lam, var_f=var_f, var_cv=var_g, cov=cov, rho=rho,
                         residual_var=residual, degenerate=degenerate)


def mscv_estimate(f_samples, cv_samples, cv_mean_ref, lam) -> EstimatorReport:
    """Control-variate estimator E_M[f] - lam (E_M[cv] - cv_mean_ref).

    lam = 0 reproduces simple_mc bit-exactly; lam = 1 with the equilibrium as
    control variate is the local-equilibrium estimator.
    """
    f = _values(f_samples)
    g = _values(cv_samples)
    if f.shape != g.shape:
        raise ValueError("full-model and control-variate samples must be paired")
    if cv_mean_ref is None:
        raise ValueError("control-variate mean reference is required")
    ref = np.asarray(cv_mean_ref, dtype=float)
    base = np.mean(f, axis=0)
    lam_arr = np.asarray(lam, dtype=float)
    if np.all(lam_arr == 0.0):
        estimate = base
    else:
        estimate = base - lam_arr * (np.mean(g, axis=0) - ref)
    corr_std = np.std(f - lam_arr * g, axis=0, ddof=1) if len(f) > 1 else np.zeros_like(base)
    return EstimatorReport(
        estimate=estimate,
        std_error=corr_std / np.sqrt(len(f)),
        diagnostics={"lambda": lam},
        meta={"M": len(f), "estimator": "mscv"},
    )


def effective_lambda(lam_star, M, M_E):
    """Optimal weight corrected for a finite control-variate sample size:
    lam = M_E/(M + M_E) lam_star."""
    if M < 1 or M_E < 1:
        raise ValueError("sample counts must be >= 1")
    return M_E / (M + M_E) * np.asarray(lam_star)


def multi_cv_optimal(f_samples, cv_sample_list, pointwise=False):
    """Optimal weight vector for several control variates: solve C Lam = b
    with the sample covariance matrix of the controls.

    Returns (Lam, diagnostics dict). An ill-conditioned C triggers a
    Tikhonov-regularized solve, flagged in the diagnostics.
    """
    f = _values(f_samples)
    cvs = [_values(g) for g in cv_sample_list]
    L = len(cvs)
    if L < 1:
        raise ValueError("need at least one control variate")
    if pointwise:
        raise NotImplementedError("pointwise multi-CV weights are not supported")
    C = np.empty((L, L))
    b = np.empty(L)
    var_f = _cov_var(f, f, False)[0]
    for i in range(L):
        b[i] = _cov_var(f, cvs[i], False)[0]
        for j in range(i, L):
            C[i, j] = C[j, i] = _cov_var(cvs[i], cvs[j], False)[0]
    cond = np.linalg.cond(C)
    regularized = bool(cond > ILL_CONDITIONED or not np.isfinite(cond))
    if regularized:
        tau = 1e-12 * np.trace(C) / L + 1e-300
        lam = np.linalg.solve(C + tau * np.eye(L), b)
    else:
        lam = np.linalg.solve(C, b)
    residual_var = var_f - 2.0 * lam @ b + lam @ C @ lam
    diag = {
        "C": C,
        "b": b,
        "var_f": var_f,
        "residual_var": residual_var,
        "condition_number": cond,
        "regularized": regularized,
    }
    return lam, diag


def multi_cv_estimate(f_samples, cv_sample_list, cv_mean_refs, lam) -> EstimatorReport:
    """Estimator with several control variates and given weights."""
    f = _values(f_samples)
    est = np.mean(f, axis=0)
    for lam_h, g, ref in zip(lam, cv_sample_list, cv_mean_refs):
        est = est - lam_h * (np.mean(_values(g), axis=0) - np.asarray(ref, dtype=float))
    return EstimatorReport(estimate=est, diagnostics={"lambda": np.asarray(lam)},
                           meta={"M": len(f), "estimator": "multi_cv"})


def two_cv_closed_form(f_samples, cv1_samples, cv2_samples):
    """Closed-form optimal weights for exactly two control variates."""
    f = _values(f_samples)
    g1 = _values(cv1_samples)
    g2 = _values(cv2_samples)
    c_f1 = _cov_var(f, g1, False)[0]
    c_f2 = _cov_var(f, g2, False)[0]
    c_12, v1, v2 = _cov_var(g1, g2, False)
    delta = v1 * v2 - c_12**2
    lam1 = (v2 * c_f1 - c_12 * c_f2) / delta
    lam2 = (v1 * c_f2 - c_12 * c_f1) / delta
    return np.array([lam1, lam2])


def _check_decreasing(counts):
    for a, b in zip(counts[:-1], counts[1:]):
        if b >= a:
            raise ValueError(f"sample counts must decrease with the level: {counts}")


def hierarchical_estimate(level0_samples, level_pairs, mode="quasi_optimal",
                          pointwise=False) -> EstimatorReport:
    """Recursive control-variate estimator over a model hierarchy.

    level0_samples: M_0 samples of the cheapest model f_1.
    level_pairs[h-1]: pair (samples of f_h, samples of f_{h+1}) evaluated on
    the same M_h fresh z-samples, h = 1..L; f_{L+1} is the full model.
    The combined estimator is
        lam_1 E_{M0}[f_1] + sum_h (lam_{h+1} E_{Mh}[f_{h+1}] - lam_h E_{Mh}[f_h])
    with lam_h the product of the stage weights above level h. mode
    "quasi_optimal" uses lam_hat_j = Cov(f_{j+1}, f_j)/Var(f_j); "unit" sets
    every stage weight to 1 (telescoping estimator). pointwise=True estimates
    the stage weights per field point instead of one scalar per stage.
    """
    f1 = _values(level0_samples)
    pairs = [(_values(a), _values(b)) for a, b in level_pairs]
    L = len(pairs)
    if L < 1:
        raise ValueError("need at least one correction level")
    counts = [len(f1)] + [len(a) for a, _ in pairs]
    _check_decreasing(counts)
    if mode == "unit":
        lam_hat = [1.0] * L
    else:
        lam_hat = []
        for coarse, fine in pairs:
            d = optimal_lambda(fine, coarse, pointwise=pointwise)
            lam_hat.append(0.0 if d.degenerate else d.lam)
    # lam_h = prod_{j=h..L} lam_hat_j (1-based); lam[L] (0-based index L) = 1
    lam = [None] * (L + 1)
    lam[L] = 1.0
    for h in range(L - 1, -1, -1):
        lam[h] = lam_hat[h] * lam[h + 1]
    est = lam[0] * np.mean(f1, axis=0)
    for h, (coarse, fine) in enumerate(pairs):
        est = est + lam[h + 1] * np.mean(fine, axis=0) - lam[h] * np.mean(coarse, axis=0)
    return EstimatorReport(
        estimate=est,
        diagnostics={"lambda_hat": np.asarray(lam_hat), "lambda": np.asarray(lam[:-1])},
        meta={"counts": counts, "estimator": f"hierarchical_{mode}"},
    )


def prolong_piecewise_constant(field, factor, axes):
    """Inject a coarse field into a grid refined by an integer factor."""
    out = np.asarray(field, dtype=float)
    for ax in axes:
        out = np.repeat(out, factor, axis=ax)
    return out


def mlmc_estimate(level_solver, n_levels, counts, z_sampler, mode="unit",
                  prolong_axes=(0,), pointwise=False) -> EstimatorReport:
    """Multilevel Monte Carlo over a factor-2 grid hierarchy.

    level_solver(h, z) returns the field on the level-h grid, h = 1 (coarsest)
    .. n_levels (finest); level h has 2^(h-1) times the coarse resolution.
    counts = [M_0, ..., M_{L-1}] are the per-level sample sizes (M_0 for the
    coarse base term). z_sampler(level, count) draws the level's z samples;
    both solvers of a correction level share them. Coarse fields are prolonged
    to the finest grid by piecewise-constant injection before differencing.
    mode "unit" is the classical MLMC estimator; "quasi_optimal" reuses the
    hierarchical stage weights.
    """
    L = n_levels
    if len(counts) != L:
        raise ValueError(f"need {L} sample counts, got {len(counts)}")
    _check_decreasing(counts)

    def to_fine(field, h):
        return prolong_piecewise_constant(field, 2 ** (L - h), prolong_axes)

    z0 = z_sampler(0, counts[0])
    base = np.stack([to_fine(level_solver(1, z), 1) for z in z0])
    pairs = []
    for h in range(1, L):
        zh = z_sampler(h, counts[h])
        coarse = np.stack([to_fine(level_solver(h, z), h) for z in zh])
        fine = np.stack([to_fine(level_solver(h + 1, z), h + 1) for z in zh])
        pairs.append((coarse, fine))
    if not pairs:
        return simple_mc(base)
    return hierarchical_estimate(base, pairs, mode=mode, pointwise=pointwise)


def error_norm(estimate, reference, norm="L1x", dx=1.0):
    """Error norms between estimate and reference fields.

    With a single field (1-D input) "L1x" and "Linf" apply. With a leading
    repetition axis (2-D input) the mixed norms are available:
    "L1x_L2w" = E[ ||e||_{L1}^2 ]^{1/2} and
    "L2w_L1x" = || E[e^2]^{1/2} ||_{L1} (the former is bounded by the latter,
    by the Minkowski integral inequality).
    """
    e = np.asarray(estimate, dtype=float) - np.asarray(reference, dtype=float)
    if norm == "Linf":
        return float(np.max(np.abs(e)))
    if norm == "L1x":
        return float(np.mean(np.sum(np.abs(e), axis=-1) * dx)) if e.ndim > 1 \
            else float(np.sum(np.abs(e)) * dx)
    if e.ndim < 2:
        raise ValueError(f"norm {norm!r} needs a repetition axis")
    if norm == "L1x_L2w":
        return float(np.sqrt(np.mean(np.sum(np.abs(e), axis=-1) ** 2 * dx**2)))
    if norm == "L2w_L1x":
        return float(np.sum(np.sqrt(np.mean(e**2, axis=0))) * dx)
    raise ValueError(f"unknown norm {norm!r}")

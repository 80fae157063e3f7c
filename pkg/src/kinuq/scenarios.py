"""Builtin experiment scenarios for the command-line runner.

Each scenario owns a default parameter set, a validator that sweeps the
preconditions of the modules it drives, and a run function that writes CSV
artifacts. Output columns are documented in docs/csv_schemas.md.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import estimators as est
from . import kinetic, particles, sg, solvers
from .io_utils import PhaseTimer, write_csv
from .uq_random import UncertaintySpec, build_basis, sample_z


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    defaults: dict
    validate: object
    run: object


REGISTRY: dict = {}


def _register(name, description, defaults, validate, run):
    REGISTRY[name] = Scenario(name, description, defaults, validate, run)


def ordered_map(fn, items, threads):
    """Map preserving order; thread pool only when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _l1(a, b, dvol):
    return float(np.sum(np.abs(np.asarray(a) - np.asarray(b))) * dvol)


# ---------------------------------------------------------------------------
# homogeneous relaxation (exact Maxwell-molecule solution), MSCV estimators

def _homog_setup(p):
    spec = UncertaintySpec(kind="uniform", a=0.0, b=1.0)
    grid = kinetic.VelocityGrid(dim=2, vmax=p["vmax"], n=p["nv"])
    alpha_fn = lambda z: 2.0 + p["kappa"] * z
    return spec, grid, alpha_fn


def _homog_states(z_vals, times, alpha_fn, grid):
    """f(z,t), equilibrium and surrogate states for a batch of z values.

    Returns (f, f_eq, f_bgk) arrays of shape (len(z), len(times)) + grid.shape.
    """
    nz, nt = len(z_vals), len(times)
    f = np.empty((nz, nt) + grid.shape)
    feq = np.empty_like(f)
    fbgk = np.empty_like(f)
    for i, z in enumerate(z_vals):
        f0 = kinetic.bkw_exact(z, 0.0, alpha_fn, grid)
        T = 1.0 / float(alpha_fn(z))
        eq = kinetic.maxwellian(kinetic.MomentSet(1.0, [0.0, 0.0], T), grid)
        for k, t in enumerate(times):
            f[i, k] = kinetic.bkw_exact(z, t, alpha_fn, grid)
            feq[i, k] = eq
            fbgk[i, k] = kinetic.bgk_interpolant(f0, eq, t)
    return f, feq, fbgk


def _validate_homog(p):
    issues = []
    if p["M"] < 2:
        issues.append("error: M must be >= 2 for covariance estimates")
    if p["nv"] < 8:
        issues.append("error: nv too small to resolve the relaxation profile")
    if not 0 < p["kappa"] <= 2.0:
        issues.append("error: kappa must lie in (0, 2] so that alpha(z) >= 1")
    if p.get("M_E", p["quad_nodes"]) < p["M"]:
        issues.append("warning: M_E < M leaves the control-variate mean noisier "
                      "than the estimator it corrects")
    return issues


def _run_homog_mscv(p, seed, out_dir, manifest, threads):
    spec, grid, alpha_fn = _homog_setup(p)
    times = np.arange(0.0, p["t_final"] + 1e-12, p["dt_out"])
    dvol = grid.cell_volume
    with PhaseTimer(manifest, "reference"):
        qb = build_basis(spec, 1, p["quad_nodes"])
        fq = _homog_states(qb.nodes, times, alpha_fn, grid)
        truth = np.tensordot(qb.weights, fq[0], axes=(0, 0))
        cv_mean = np.tensordot(qb.weights, fq[2], axes=(0, 0))
    with PhaseTimer(manifest, "sampling"):
        z = sample_z(spec, p["M"], seed)
        f, _, fbgk = _homog_states(z, times, alpha_fn, grid)
    rows = {"t": times, "err_mc": [], "err_mscv": [], "lambda": []}
    for k in range(len(times)):
        mc = est.simple_mc(f[:, k])
        d = est.optimal_lambda(f[:, k], fbgk[:, k])
        cv = est.mscv_estimate(f[:, k], fbgk[:, k], cv_mean[k], d.lam)
        rows["err_mc"].append(_l1(mc.estimate, truth[k], dvol))
        rows["err_mscv"].append(_l1(cv.estimate, truth[k], dvol))
        rows["lambda"].append(d.lam)
    path = write_csv(out_dir / "mscv_error.csv", rows)
    manifest.add_file(path)
    return [path]


_register(
    "homog-relax-mscv",
    "Space-homogeneous relaxation with uncertain temperature: simple MC vs "
    "the optimal control-variate estimator built on the relaxation surrogate.",
    {"M": 10, "quad_nodes": 40, "nv": 32, "vmax": 5.0, "kappa": 0.25,
     "t_final": 5.0, "dt_out": 0.25},
    _validate_homog,
    _run_homog_mscv,
)


def _run_homog_mscv2(p, seed, out_dir, manifest, threads):
    spec, grid, alpha_fn = _homog_setup(p)
    times = np.arange(0.0, p["t_final"] + 1e-12, p["dt_out"])
    dvol = grid.cell_volume
    with PhaseTimer(manifest, "reference"):
        qb = build_basis(spec, 1, p["quad_nodes"])
        fq, feq_q, fbgk_q = _homog_states(qb.nodes, times, alpha_fn, grid)
        truth = np.tensordot(qb.weights, fq, axes=(0, 0))
        eq_mean = np.tensordot(qb.weights, feq_q, axes=(0, 0))
        bgk_mean = np.tensordot(qb.weights, fbgk_q, axes=(0, 0))
    with PhaseTimer(manifest, "sampling"):
        z = sample_z(spec, p["M"], seed)
        f, feq, fbgk = _homog_states(z, times, alpha_fn, grid)
    rows = {"t": times, "err_mc": [], "err_mscv": [], "err_mscv2": [],
            "lambda1": [], "lambda2": []}
    for k in range(len(times)):
        mc = est.simple_mc(f[:, k])
        d = est.optimal_lambda(f[:, k], fbgk[:, k])
        one = est.mscv_estimate(f[:, k], fbgk[:, k], bgk_mean[k], d.lam)
        lam2 = est.two_cv_closed_form(f[:, k], feq[:, k], fbgk[:, k])
        two = est.multi_cv_estimate(f[:, k], [feq[:, k], fbgk[:, k]],
                                    [eq_mean[k], bgk_mean[k]], lam2)
        rows["err_mc"].append(_l1(mc.estimate, truth[k], dvol))
        rows["err_mscv"].append(_l1(one.estimate, truth[k], dvol))
        rows["err_mscv2"].append(_l1(two.estimate, truth[k], dvol))
        rows["lambda1"].append(lam2[0])
        rows["lambda2"].append(lam2[1])
    path = write_csv(out_dir / "mscv2_error.csv", rows)
    manifest.add_file(path)
    return [path]


_register(
    "homog-mscv2",
    "Homogeneous relaxation with two control variates (equilibrium plus the "
    "relaxation surrogate) against single-CV and plain MC.",
    {"M": 10, "quad_nodes": 40, "nv": 32, "vmax": 5.0, "kappa": 0.25,
     "t_final": 1.0, "dt_out": 0.1},
    _validate_homog,
    _run_homog_mscv2,
)


# ---------------------------------------------------------------------------
# Sod shock tube: BGK solves with the compressible Euler flow as CV

def _validate_sod(p):
    issues = []
    if p["M"] < 2:
        issues.append("error: M must be >= 2 for covariance estimates")
    if p["eps"] <= 0:
        issues.append("error: eps must be positive")
    dt = p.get("dt")
    if dt is not None:
        bound = p["length"] / p["nx"] / p["vmax"]
        if dt > bound:
            issues.append(f"error: dt={dt} violates the transport CFL bound "
                          f"dx/vmax={bound:.4g}")
    return issues


def _sod_bgk_rho(z, p, grid):
    nx = p["nx"]
    dx = p["length"] / nx
    x, rho, u, T = solvers.sod_initial(z, nx, s=p["s"], length=p["length"])
    f0 = np.stack([
        kinetic.maxwellian(kinetic.MomentSet(rho[i], [u[i]], T[i]), grid)
        for i in range(nx)
    ])
    out = solvers.bgk_solve(f0, dx, grid, p["eps"], p["t_final"], dt=p.get("dt"),
                            bc="periodic")
    fT = out[-1][1]
    return np.sum(fT, axis=1) * grid.dv


def _sod_euler_rho(z, p):
    nx = p["nx"]
    dx = p["length"] / nx
    x, rho, u, T = solvers.sod_initial(z, nx, s=p["s"], length=p["length"])
    out = solvers.euler_solve(rho, u, T, dx, d_v=1, t_final=p["t_final"],
                              bc="periodic")
    return out[-1].rho


def _run_sod_mscv(p, seed, out_dir, manifest, threads):
    grid = kinetic.VelocityGrid(dim=1, vmax=p["vmax"], n=p["nv"])
    spec = UncertaintySpec(kind="uniform", a=0.0, b=1.0)
    nx = p["nx"]
    dx = p["length"] / nx
    x = (np.arange(nx) + 0.5) * dx
    with PhaseTimer(manifest, "reference"):
        qb = build_basis(spec, 1, p["quad_nodes"])
        rho_ref = np.tensordot(
            qb.weights,
            np.stack(ordered_map(lambda z: _sod_bgk_rho(z, p, grid), qb.nodes, threads)),
            axes=(0, 0))
        euler_mean = np.tensordot(
            qb.weights,
            np.stack(ordered_map(lambda z: _sod_euler_rho(z, p), qb.nodes, threads)),
            axes=(0, 0))
    with PhaseTimer(manifest, "sampling"):
        z = sample_z(spec, p["M"], seed)
        f = np.stack(ordered_map(lambda zz: _sod_bgk_rho(zz, p, grid), z, threads))
        g = np.stack(ordered_map(lambda zz: _sod_euler_rho(zz, p), z, threads))
    d = est.optimal_lambda(f, g, pointwise=True)
    mc = est.simple_mc(f)
    cv = est.mscv_estimate(f, g, euler_mean, d.lam)
    rows = {
        "x": x,
        "rho_ref": rho_ref,
        "rho_mc": mc.estimate,
        "rho_mscv": cv.estimate,
        "lambda": d.lam,
    }
    path = write_csv(out_dir / "sod_density.csv", rows)
    manifest.add_file(path)
    return [path]


_register(
    "sod-mscv",
    "Sod shock tube with uncertain initial temperatures: kinetic BGK samples "
    "corrected by the compressible Euler flow as control variate.",
    {"M": 10, "quad_nodes": 20, "nx": 50, "length": 1.0, "nv": 32, "vmax": 8.0,
     "eps": 1e-6, "s": 0.25, "t_final": 0.1, "dt": None},
    _validate_sod,
    _run_sod_mscv,
)


# ---------------------------------------------------------------------------
# sudden heating: diffusive wall with uncertain wall temperature

def _validate_heating(p):
    issues = []
    if p["Tw_scale"] <= 0:
        issues.append("error: Tw_scale must be positive")
    if p["eps"] <= 0:
        issues.append("error: eps must be positive")
    if p["quad_nodes"] < 2:
        issues.append("error: quad_nodes must be >= 2")
    return issues


def _heating_fields(z, p, grid):
    nx = p["nx"]
    dx = p["length"] / nx
    f0 = np.tile(
        kinetic.maxwellian(kinetic.MomentSet(1.0, [0.0], p["T0"]), grid), (nx, 1))
    Tw = p["Tw_scale"] * (p["T0"] + p["s"] * z)
    out = solvers.bgk_solve(f0, dx, grid, p["eps"], p["t_final"], dt=p.get("dt"),
                            bc="walls", Tw_left=Tw, Tw_right=None)
    fT = out[-1][1]
    mom = [kinetic.moments(fT[i], grid) for i in range(nx)]
    return np.array([[m.rho, m.T] for m in mom]).T  # (2, nx)


def _run_sudden_heating(p, seed, out_dir, manifest, threads):
    grid = kinetic.VelocityGrid(dim=1, vmax=p["vmax"], n=p["nv"])
    spec = UncertaintySpec(kind="uniform", a=0.0, b=1.0)
    nx = p["nx"]
    dx = p["length"] / nx
    x = (np.arange(nx) + 0.5) * dx
    with PhaseTimer(manifest, "quadrature"):
        qb = build_basis(spec, 1, p["quad_nodes"])
        fields = np.stack(ordered_map(lambda z: _heating_fields(z, p, grid),
                                      qb.nodes, threads))  # (H, 2, nx)
        mean = np.tensordot(qb.weights, fields, axes=(0, 0))
        second = np.tensordot(qb.weights, fields**2, axes=(0, 0))
        var = np.maximum(second - mean**2, 0.0)
    rows = {
        "x": x,
        "rho_mean": mean[0], "rho_var": var[0],
        "T_mean": mean[1], "T_var": var[1],
    }
    path = write_csv(out_dir / "heating_profiles.csv", rows)
    manifest.add_file(path)
    return [path]


_register(
    "sudden-heating",
    "Gas between walls where the left wall temperature jumps to an uncertain "
    "value: mean and variance of density and temperature profiles.",
    {"quad_nodes": 16, "nx": 40, "length": 1.0, "nv": 32, "vmax": 8.0,
     "eps": 0.01, "T0": 1.0, "s": 0.2, "Tw_scale": 2.0, "t_final": 0.2,
     "dt": None},
    _validate_heating,
    _run_sudden_heating,
)


# ---------------------------------------------------------------------------
# MLMC over a BGK grid hierarchy (Sod data)

def _validate_mlmc(p):
    issues = []
    counts = p["counts"]
    if len(counts) != p["levels"]:
        issues.append(f"error: counts {counts} must list one entry per level "
                      f"(levels={p['levels']})")
    if any(b >= a for a, b in zip(counts[:-1], counts[1:])):
        issues.append(f"error: counts must strictly decrease with level: {counts}")
    if p["nx_coarse"] < 4:
        issues.append("error: nx_coarse too small")
    return issues


def _mlmc_level_solver(p, grid):
    def solve(h, z):
        q = dict(p)
        q["nx"] = p["nx_coarse"] * 2 ** (h - 1)
        return _sod_bgk_rho(z, q, grid)
    return solve


def _run_mlmc_bgk(p, seed, out_dir, manifest, threads):
    grid = kinetic.VelocityGrid(dim=1, vmax=p["vmax"], n=p["nv"])
    spec = UncertaintySpec(kind="uniform", a=0.0, b=1.0)
    L = p["levels"]
    nx_fine = p["nx_coarse"] * 2 ** (L - 1)
    dx_fine = p["length"] / nx_fine
    x = (np.arange(nx_fine) + 0.5) * dx_fine
    solve = _mlmc_level_solver(p, grid)
    with PhaseTimer(manifest, "reference"):
        qb = build_basis(spec, 1, p["quad_nodes"])
        rho_ref = np.tensordot(
            qb.weights,
            np.stack(ordered_map(lambda z: solve(L, z), qb.nodes, threads)),
            axes=(0, 0))
    ss = np.random.SeedSequence(seed)
    level_seeds = ss.spawn(L)

    def z_sampler(level, count):
        return sample_z(spec, count, np.random.default_rng(level_seeds[level]))

    results = {}
    for mode in ("unit", "quasi_optimal"):
        with PhaseTimer(manifest, f"mlmc_{mode}"):
            results[mode] = est.mlmc_estimate(solve, L, p["counts"], z_sampler,
                                              mode=mode)
    rows = {
        "x": x,
        "rho_ref": rho_ref,
        "rho_mlmc_unit": results["unit"].estimate,
        "rho_mlmc_opt": results["quasi_optimal"].estimate,
    }
    path = write_csv(out_dir / "mlmc_density.csv", rows)
    manifest.add_file(path)
    summary = {
        "t": [p["t_final"]],
        "err_unit": [est.error_norm(results["unit"].estimate, rho_ref,
                                    "L1x", dx_fine)],
        "err_opt": [est.error_norm(results["quasi_optimal"].estimate, rho_ref,
                                   "L1x", dx_fine)],
    }
    path2 = write_csv(out_dir / "mlmc_summary.csv", summary)
    manifest.add_file(path2)
    return [path, path2]


_register(
    "mlmc-bgk",
    "Multilevel Monte Carlo for the Sod tube on a three-level BGK grid "
    "hierarchy, unit weights vs quasi-optimal weights.",
    {"levels": 3, "counts": [320, 80, 20], "nx_coarse": 10, "length": 1.0,
     "nv": 32, "vmax": 8.0, "eps": 1e-6, "s": 0.1, "t_final": 0.1,
     "quad_nodes": 20, "dt": None},
    _validate_mlmc,
    _run_mlmc_bgk,
)


# ---------------------------------------------------------------------------
# swarming SG: standard vs equilibrium-preserving scheme, error vs degree

def _validate_swarming(p):
    issues = []
    if p["nv"] % 2 == 0:
        issues.append("warning: odd nv keeps v = 0 off the cell faces")
    if max(p["M_list"]) >= p["M_ref"]:
        issues.append("error: reference degree M_ref must exceed every entry "
                      "of M_list")
    if p["dt"] <= 0:
        issues.append("error: dt must be positive")
    return issues


def _swarming_run(p, M, scheme_kind):
    """Final-time SG field at degree M with the standard or the
    equilibrium-preserving scheme."""
    spec = UncertaintySpec(kind="uniform", a=-1.0, b=1.0)
    basis = build_basis(spec, M)
    grid = kinetic.VelocityGrid(dim=1, vmax=p["vmax"], n=p["nv"])
    alpha_fn = lambda z: p["alpha"] + 0.0 * z
    D_fn = lambda z: p["D0"] + p["D1"] * z
    f0 = np.exp(-(grid.centers - p["u0"]) ** 2 / (2.0 * p["sigma0"] ** 2))
    f0 = f0 / (np.sum(f0) * grid.dv)
    nodal = np.tile(f0, (basis.n_nodes, 1))
    steps = int(round(p["t_final"] / p["dt"]))
    if scheme_kind == "standard":
        field = sg.SgField.from_nodal(nodal, basis, grid)
        for _ in range(steps):
            field = sg.sg_fokker_planck_step(field, alpha_fn, D_fn, p["dt"],
                                             scheme="implicit")
        return field
    f_field = sg.SgField.from_nodal(nodal, basis, grid)
    u_nodes = sg._sg_fp_mean_velocity(f_field.coeffs, basis, grid)
    fq = sg.sg_quasi_equilibrium_field(basis, grid, alpha_fn, D_fn, u_nodes)
    g = sg.SgField(coeffs=f_field.coeffs - fq.coeffs, basis=basis, grid=grid)
    for _ in range(steps):
        g, fq = sg.sg_quasi_equilibrium_step(g, fq, alpha_fn, D_fn, p["dt"],
                                             scheme="implicit")
    return sg.SgField(coeffs=g.coeffs + fq.coeffs, basis=basis, grid=grid)


def _run_swarming_sg(p, seed, out_dir, manifest, threads):
    spec = UncertaintySpec(kind="uniform", a=-1.0, b=1.0)
    with PhaseTimer(manifest, "reference"):
        ref_field = _swarming_run(p, p["M_ref"], "micro_macro")
        quad = build_basis(spec, p["M_ref"], 2 * (p["M_ref"] + 1))
        ref_nodal = ref_field.reconstruct(quad.nodes)
    errs = {"standard": [], "micro_macro": []}
    for kind in errs:
        with PhaseTimer(manifest, f"sweep_{kind}"):
            for M in p["M_list"]:
                field = _swarming_run(p, M, kind)
                errs[kind].append(sg.sg_l2_error(field, ref_nodal, quad))
    rows = {"M": p["M_list"], "err_standard": errs["standard"],
            "err_micromacro": errs["micro_macro"]}
    path = write_csv(out_dir / "swarming_decay.csv", rows)
    manifest.add_file(path)
    return [path]


_register(
    "swarming-sg",
    "Self-propulsion Fokker-Planck model with uncertain diffusion: spectral "
    "error decay of the standard vs the equilibrium-preserving SG scheme.",
    {"M_list": [0, 2, 4, 6], "M_ref": 12, "nv": 81, "vmax": 2.0, "alpha": 2.0,
     "D0": 0.2, "D1": 0.1, "u0": 0.4, "sigma0": 0.5, "dt": 0.1,
     "t_final": 10.0},
    _validate_swarming,
    _run_swarming_sg,
)


# ---------------------------------------------------------------------------
# particle-SG alignment dynamics

def _validate_particle_align(p):
    issues = []
    if p["S"] > p["N"]:
        issues.append(f"error: subset size S={p['S']} exceeds the ensemble "
                      f"size N={p['N']}")
    if p["M"] < 1:
        issues.append("error: gPC degree M must be >= 1 to carry z-dependence")
    return issues


def _run_particle_align(p, seed, out_dir, manifest, threads):
    spec = UncertaintySpec(kind="uniform", a=-1.0, b=1.0)
    basis = build_basis(spec, p["M"])
    rng = np.random.default_rng(seed)

    def bimodal(n, r):
        sign = 2.0 * (r.random(n) < 0.5) - 1.0
        return (sign * p["mu0"] + r.normal(0.0, p["sigma0"], n))[:, None]

    ens = particles.init_gpc_particles(p["N"], basis, seed, bimodal)
    cfg = particles.InteractionConfig(dt=p["dt"], subset_size=p["S"],
                                      P_fn=lambda z: 1.0 + 0.5 * z)
    z_probe = np.array(p["z_probe"])
    steps = int(round(p["t_final"] / p["dt"]))
    times = [0.0]
    var_rows = [np.var(ens.velocities_at(z_probe)[..., 0], axis=1)]
    mean_rows = [np.mean(ens.velocities_at(z_probe)[..., 0], axis=1)]
    with PhaseTimer(manifest, "dynamics"):
        for k in range(steps):
            ens = particles.particle_sg_step(ens, cfg, rng)
            times.append((k + 1) * p["dt"])
            v = ens.velocities_at(z_probe)[..., 0]
            var_rows.append(np.var(v, axis=1))
            mean_rows.append(np.mean(v, axis=1))
    var_rows = np.array(var_rows)
    mean_rows = np.array(mean_rows)
    rows = {"t": times}
    for j, z in enumerate(z_probe):
        tag = f"{z:+.2f}".replace("+", "p").replace("-", "m").replace(".", "_")
        rows[f"var_z{tag}"] = var_rows[:, j]
        rows[f"mean_z{tag}"] = mean_rows[:, j]
    path = write_csv(out_dir / "alignment_variance.csv", rows)
    manifest.add_file(path)
    return [path]


_register(
    "particle-sg-align",
    "Alignment dynamics with an uncertain interaction strength, integrated on "
    "gPC particle coefficients with random interaction subsets.",
    {"N": 200, "S": 10, "M": 4, "mu0": 0.25, "sigma0": 0.3162278, "dt": 0.1,
     "t_final": 5.0, "z_probe": [-0.9, -0.3, 0.3, 0.9]},
    _validate_particle_align,
    _run_particle_align,
)


# ---------------------------------------------------------------------------
# DSMC-SG relaxation against the exact fourth moment

def _validate_dsmc(p):
    issues = []
    if p["mu"] * p["dt"] / 2.0 > 0.5:
        issues.append(f"error: mu dt / 2 = {p['mu'] * p['dt'] / 2} exceeds the "
                      "fraction of particles that can pair per step")
    if not 0 < p["kappa"] <= 2.0:
        issues.append("error: kappa must lie in (0, 2] so that alpha(z) >= 1")
    if p["N"] < 100:
        issues.append("warning: very small N, moment estimates will be noisy")
    return issues


def _run_dsmc_sg(p, seed, out_dir, manifest, threads):
    spec = UncertaintySpec(kind="uniform", a=0.0, b=1.0)
    basis = build_basis(spec, p["M"])
    alpha_fn = lambda z: 2.0 + p["kappa"] * z
    with PhaseTimer(manifest, "dsmc"):
        out = particles.dsmc_sg_run(alpha_fn, p["N"], basis, p["dt"],
                                    p["t_final"], seed, mu=p["mu"])
    quad = build_basis(spec, p["M"], 2 * (p["M"] + 1) + 8)
    phi = basis.eval(quad.nodes)  # (H, K)
    m4_nodes = out["m4"] @ phi.T  # (steps, H)
    exact = np.array([[kinetic.bkw_fourth_moment(z, t, alpha_fn)
                       for z in quad.nodes] for t in out["t"]])
    l2 = np.sqrt((m4_nodes - exact) ** 2 @ quad.weights)
    rows = {
        "t": out["t"],
        "m4_mean": out["m4"][:, 0],
        "m4_mean_exact": exact @ quad.weights,
        "l2_err": l2,
        "max_momentum": np.max(np.abs(out["momentum"]), axis=(1, 2)),
    }
    path = write_csv(out_dir / "dsmc_m4.csv", rows)
    manifest.add_file(path)
    return [path]


_register(
    "dsmc-sg-bkw",
    "Collisional Monte Carlo for Maxwell molecules on gPC coefficients, "
    "validated against the exact fourth-moment relaxation.",
    {"N": 20000, "M": 4, "kappa": 0.25, "mu": 1.0, "dt": 0.1, "t_final": 5.0},
    _validate_dsmc,
    _run_dsmc_sg,
)

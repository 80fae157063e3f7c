"""Stochastic Galerkin solvers in the random dimension.

State is carried as gPC coefficient arrays over a velocity grid. Operators
with scalar z-dependent coefficients couple the modes through Galerkin
matrices E[kappa(z) Phi_m Phi_h] computed with the basis quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinetic import VelocityGrid, quasi_equilibrium
from .solvers import StabilityError, swarming_drift
from .uq_random import GpcBasis, project


@dataclass
class SgField:
    """gPC coefficient array f_hat[m, ...] over a velocity grid."""

    coeffs: np.ndarray
    basis: GpcBasis
    grid: VelocityGrid

    def __post_init__(self):
        if self.coeffs.shape[0] != self.basis.n_modes:
            raise ValueError("leading axis of coeffs must be the mode index")

    def reconstruct(self, z):
        """Evaluate the expansion at z; z may be an array of nodes."""
        phi = self.basis.eval(z)
        return np.tensordot(phi, self.coeffs, axes=(-1, 0))

    @property
    def mean(self):
        return self.coeffs[0]

    @property
    def variance(self):
        return np.sum(self.coeffs[1:] ** 2, axis=0)

    @classmethod
    def from_nodal(cls, values_at_nodes, basis, grid):
        """Project per-quadrature-node fields (H, ...) onto the basis."""
        return cls(coeffs=project(values_at_nodes, basis).coeffs, basis=basis, grid=grid)


def galerkin_tensor(kappa_fn, basis: GpcBasis) -> np.ndarray:
    """Matrix E[kappa(z) Phi_m Phi_h], symmetric; identity times the constant
    for z-independent kappa."""
    kz = np.asarray(kappa_fn(basis.nodes), dtype=float) * np.ones(basis.n_nodes)
    phi = basis.node_values
    return (phi * (basis.weights * kz)[:, None]).T @ phi


def _check_relax_stability(nu_tensor, dt, eps):
    radius = float(np.max(np.abs(np.linalg.eigvalsh(nu_tensor))))
    if dt / eps * radius > 2.0 + 1e-12:
        raise StabilityError(
            f"dt/eps = {dt / eps:.3g} exceeds the explicit bound 2/{radius:.3g}")


def sg_standard_relax_step(field: SgField, equilibrium: SgField, nu_tensor,
                           dt, eps) -> SgField:
    """Explicit SG step for the relaxation operator nu(z) (f_inf - f):
    f_hat <- f_hat + dt/eps nu_tensor (f_hat_inf - f_hat)."""
    _check_relax_stability(nu_tensor, dt, eps)
    delta = equilibrium.coeffs - field.coeffs
    new = field.coeffs + dt / eps * np.tensordot(nu_tensor, delta, axes=(1, 0))
    return SgField(coeffs=new, basis=field.basis, grid=field.grid)


def sg_micro_macro_relax_step(g_field: SgField, nu_tensor, dt, eps) -> SgField:
    """Step the perturbation g = f - f_inf: g_hat <- g_hat - dt/eps nu_tensor g_hat.

    The update is linear-homogeneous in g, so g = 0 is a bit-exact fixed point.
    """
    _check_relax_stability(nu_tensor, dt, eps)
    new = g_field.coeffs - dt / eps * np.tensordot(nu_tensor, g_field.coeffs, axes=(1, 0))
    return SgField(coeffs=new, basis=g_field.basis, grid=g_field.grid)


def _sg_fp_operator(basis, grid, alpha_fn, D_fn, u_nodes):
    """Per-face drift matrices and the diffusion matrix of the SG swarming
    operator. Returns (B_face (n-1, K, K), A_D (K, K)) with K = M+1."""
    A_alpha = galerkin_tensor(alpha_fn, basis)
    A_D = galerkin_tensor(D_fn, basis)
    phi = basis.node_values
    A_u = (phi * (basis.weights * u_nodes)[:, None]).T @ phi
    v = grid.centers
    vf = v[:-1] + 0.5 * grid.dv
    K = basis.n_modes
    eye = np.eye(K)
    g1 = (vf**2 - 1.0) * vf
    B = g1[:, None, None] * A_alpha[None] + vf[:, None, None] * eye[None] - A_u[None]
    return B, A_D


def _sg_fp_apply(coeffs, B, A_D, dv):
    """Flux divergence of the mode-coupled operator applied to coeffs (K, n)."""
    favg = 0.5 * (coeffs[:, :-1] + coeffs[:, 1:])
    drift = np.einsum("fkm,mf->kf", B, favg)
    diff = A_D @ (coeffs[:, 1:] - coeffs[:, :-1]) / dv
    F = drift + diff
    out = np.zeros_like(coeffs)
    out[:, :-1] += F / dv
    out[:, 1:] -= F / dv
    return out


def _sg_fp_mean_velocity(coeffs, basis, grid):
    """u(z) at the quadrature nodes, from the reconstructed solution."""
    v = grid.centers
    dv = grid.dv
    phi = basis.node_values  # (H, K)
    f_nodes = phi @ coeffs  # (H, n)
    mass = np.sum(f_nodes, axis=1) * dv
    return (f_nodes @ v) * dv / mass


def _block_tridiag_solve(lower, diag, upper, rhs):
    """Thomas algorithm with (K, K) blocks. lower/upper have n-1 blocks."""
    n = diag.shape[0]
    K = diag.shape[1]
    cp = np.empty_like(upper)
    dp = np.empty((n, K) + rhs.shape[2:])
    cp[0] = np.linalg.solve(diag[0], upper[0])
    dp[0] = np.linalg.solve(diag[0], rhs[0])
    for i in range(1, n):
        denom = diag[i] - lower[i - 1] @ cp[i - 1]
        if i < n - 1:
            cp[i] = np.linalg.solve(denom, upper[i])
        dp[i] = np.linalg.solve(denom, rhs[i] - lower[i - 1] @ dp[i - 1])
    x = np.empty_like(dp)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] @ x[i + 1]
    return x


def _sg_fp_implicit_solve(coeffs, B, A_D, dv, dt):
    """Backward Euler (I - dt L) x = coeffs for the mode-coupled operator."""
    K, n = coeffs.shape
    eyeK = np.eye(K)
    # face coefficient blocks: F_f = B_f (f_j + f_{j+1})/2 + A_D (f_{j+1}-f_j)/dv
    a_self = 0.5 * B - A_D[None] / dv   # multiplies f_j
    a_next = 0.5 * B + A_D[None] / dv   # multiplies f_{j+1}
    # L row blocks: df_j = (F_j - F_{j-1}) / dv
    diag = np.zeros((n, K, K))
    lower = np.zeros((n - 1, K, K))
    upper = np.zeros((n - 1, K, K))
    diag[:-1] += a_self / dv
    upper[:] = a_next / dv
    diag[1:] -= a_next / dv
    lower[:] = -a_self / dv
    A_diag = eyeK[None] - dt * diag
    A_low = -dt * lower
    A_up = -dt * upper
    rhs = coeffs.T[:, :, None]  # (n, K, 1)
    x = _block_tridiag_solve(A_low, A_diag, A_up, rhs)
    return x[:, :, 0].T


def sg_fokker_planck_step(field: SgField, alpha_fn, D_fn, dt,
                          scheme="explicit") -> SgField:
    """One SG step of the swarming Fokker-Planck model.

    The drift and diffusion coefficients alpha(z), D(z) enter through
    Galerkin matrices; the mean velocity u(z, t) is reconstructed at the
    quadrature nodes from the current solution. "explicit" Euler requires
    dt <= dv^2 / (2 max D); "implicit" is backward Euler on the mode-coupled
    system (block-tridiagonal solve).
    """
    basis, grid = field.basis, field.grid
    dv = grid.dv
    D_max = float(np.max(D_fn(basis.nodes) * np.ones(basis.n_nodes)))
    if scheme == "explicit" and dt > dv**2 / (2.0 * D_max) * (1 + 1e-12):
        raise StabilityError(
            f"dt={dt:.3g} violates the diffusion bound {dv**2 / (2 * D_max):.3g}")
    u_nodes = _sg_fp_mean_velocity(field.coeffs, basis, grid)
    B, A_D = _sg_fp_operator(basis, grid, alpha_fn, D_fn, u_nodes)
    if scheme == "explicit":
        new = field.coeffs + dt * _sg_fp_apply(field.coeffs, B, A_D, dv)
    else:
        new = _sg_fp_implicit_solve(field.coeffs, B, A_D, dv, dt)
    return SgField(coeffs=new, basis=basis, grid=grid)


def sg_quasi_equilibrium_field(basis, grid, alpha_fn, D_fn, u_nodes) -> SgField:
    """Projection of the per-node flux-annihilating states built from u(z)."""
    alpha = np.asarray(alpha_fn(basis.nodes), dtype=float) * np.ones(basis.n_nodes)
    D = np.asarray(D_fn(basis.nodes), dtype=float) * np.ones(basis.n_nodes)
    nodal = np.stack([
        quasi_equilibrium(alpha[q], u_nodes[q], D[q], grid)
        for q in range(basis.n_nodes)
    ])
    return SgField.from_nodal(nodal, basis, grid)


def sg_quasi_equilibrium_step(g_field: SgField, fq_field: SgField, alpha_fn,
                              D_fn, dt, scheme="explicit"):
    """One micro-macro SG step with the quasi-equilibrium decomposition.

    The flux-annihilating state is rebuilt from the current mean velocity and
    the perturbation re-decomposed before stepping, so only g sees the
    discrete flux operator. Returns (new g field, new quasi-equilibrium
    field). g = 0 with a self-consistent u is preserved bit-exactly.
    """
    basis, grid = g_field.basis, g_field.grid
    dv = grid.dv
    D_max = float(np.max(D_fn(basis.nodes) * np.ones(basis.n_nodes)))
    if scheme == "explicit" and dt > dv**2 / (2.0 * D_max) * (1 + 1e-12):
        raise StabilityError(
            f"dt={dt:.3g} violates the diffusion bound {dv**2 / (2 * D_max):.3g}")
    f_coeffs = fq_field.coeffs + g_field.coeffs
    u_nodes = _sg_fp_mean_velocity(f_coeffs, basis, grid)
    fq_new = sg_quasi_equilibrium_field(basis, grid, alpha_fn, D_fn, u_nodes)
    g_coeffs = f_coeffs - fq_new.coeffs
    B, A_D = _sg_fp_operator(basis, grid, alpha_fn, D_fn, u_nodes)
    if scheme == "explicit":
        g_new = g_coeffs + dt * _sg_fp_apply(g_coeffs, B, A_D, dv)
    else:
        g_new = _sg_fp_implicit_solve(g_coeffs, B, A_D, dv, dt)
    return (SgField(coeffs=g_new, basis=basis, grid=grid), fq_new)


def sg_l2_error(field: SgField, reference_at_nodes, quad_basis) -> float:
    """L2(Omega x v) distance between a gPC field and per-node reference values.

    reference_at_nodes has shape (H_quad,) + field shape, evaluated at the
    nodes of quad_basis (which must be at least as fine as the field basis).
    """
    recon = field.reconstruct(quad_basis.nodes)
    diff2 = np.sum((recon - reference_at_nodes) ** 2, axis=tuple(range(1, recon.ndim)))
    return float(np.sqrt(np.sum(quad_basis.weights * diff2) * field.grid.cell_volume))


def sg_spectral_decay_report(run_fn, M_list, reference_fn, quad_basis):
    """Error-vs-degree table for an SG solver run.

    run_fn(M) returns the final SgField at degree M; reference_fn(z_nodes)
    returns the reference solution at the nodes of quad_basis. The table
    carries the L2(Omega) errors, a monotone-decrease flag and the fitted
    exponential decay rate (slope of log error vs M).
    """
    M_list = sorted(M_list)
    if quad_basis.n_nodes <= max(M_list) + 1:
        raise ValueError("reference quadrature is not finer than the test runs")
    ref = reference_fn(quad_basis.nodes)
    errors = []
    for M in M_list:
        field = run_fn(M)
        if field.basis.degree != M:
            raise ValueError("run_fn returned a field of the wrong degree")
        errors.append(sg_l2_error(field, ref, quad_basis))
    errors = np.array(errors)
    monotone = bool(np.all(np.diff(errors) <= 1e-14 + 1e-10 * errors[:-1]))
    pos = errors > 0
    if np.sum(pos) >= 2:
        rate = float(np.polyfit(np.array(M_list)[pos], np.log(errors[pos]), 1)[0])
    else:
        rate = -np.inf
    return {"M": list(M_list), "error": errors, "monotone": monotone,
            "decay_rate": rate}

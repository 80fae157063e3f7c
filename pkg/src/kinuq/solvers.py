"""Deterministic solvers evaluated per fixed value of the random input:
a first-order finite-volume compressible Euler solver, a 1-D-in-space BGK
solver with splitting, and a conservative finite-difference Fokker-Planck
solver for the self-propulsion (swarming) model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .kinetic import MomentSet, VelocityGrid, maxwellian


class AdmissibilityError(RuntimeError):
    """Vacuum or negative temperature produced by a solver step."""


class StabilityError(ValueError):
    """Time step violates the stability constraint of an explicit scheme."""


@dataclass(frozen=True)
class FluidField:
    """Macroscopic 1-D fields at one output time."""

    t: float
    rho: np.ndarray
    u: np.ndarray
    T: np.ndarray

    @property
    def pressure(self):
        return self.rho * self.T


def _euler_flux(U, d_v):
    rho, m, E = U
    u = m / rho
    p = (2.0 * E - rho * u**2) / d_v
    return np.array([m, m * u + p, (E + p) * u]), u, p


def _kfvs_split_fluxes(U):
    """Kinetic flux-vector-splitting fluxes of the d_v = 1 Euler system.

    Half-space moments of the local Maxwellian: I_n = int_{v>0} v^n M dv via
    the truncated-Gaussian recursion I_n = u I_{n-1} + (n-1) T I_{n-2}.
    Returns (F_plus, F_minus) for the conserved variables (rho, rho u, E).
    """
    from scipy.special import ndtr

    rho, m, E = U
    u = m / rho
    T = (2.0 * E - rho * u**2) / rho
    sig = np.sqrt(T)
    cdf = ndtr(u / sig)
    pdf = np.exp(-0.5 * (u / sig) ** 2) / np.sqrt(2.0 * np.pi)
    i0 = cdf
    i1 = u * i0 + sig * pdf
    i2 = u * i1 + T * i0
    i3 = u * i2 + 2.0 * T * i1
    Fp = np.array([rho * i1, rho * i2, 0.5 * rho * i3])
    # full moments minus the positive half give the negative half
    e1 = u
    e2 = u**2 + T
    e3 = u**3 + 3.0 * u * T
    Fm = np.array([rho * (e1 - i1), rho * (e2 - i2), 0.5 * rho * (e3 - i3)])
    return Fp, Fm


def euler_solve(rho0, u0, T0, dx, d_v, t_final, bc="transmissive",
                cfl=0.9, output_times=None, flux="rusanov"):
    """First-order finite-volume solver for the 1-D compressible Euler system.

    The pressure law is p = rho T with E = rho u^2/2 + (d_v/2) rho T, matching
    the kinetic moment closure with d_v translational degrees of freedom.
    flux "rusanov" is the local Lax-Friedrichs scheme; "kfvs" (d_v = 1 only)
    uses kinetic flux-vector splitting, the formal small-Knudsen limit of the
    split BGK scheme. Returns a list of FluidField at the requested output
    times (default: only t_final).
    """
    if flux not in ("rusanov", "kfvs"):
        raise ValueError(f"unknown flux {flux!r}")
    if flux == "kfvs" and d_v != 1:
        raise ValueError("kfvs flux is implemented for d_v = 1 only")
    rho = np.asarray(rho0, dtype=float).copy()
    u = np.asarray(u0, dtype=float) * np.ones_like(rho)
    T = np.asarray(T0, dtype=float) * np.ones_like(rho)
    if np.any(rho <= 0) or np.any(T <= 0):
        raise AdmissibilityError("initial state has nonpositive density or temperature")
    U = np.array([rho, rho * u, 0.5 * rho * u**2 + 0.5 * d_v * rho * T])
    gamma = 1.0 + 2.0 / d_v
    if output_times is None:
        output_times = [t_final]
    output_times = sorted(output_times)
    out = []
    t = 0.0
    step = 0
    next_out = 0
    while True:
        while next_out < len(output_times) and t >= output_times[next_out] - 1e-13:
            rho, m, E = U
            uu = m / rho
            TT = (2.0 * E - rho * uu**2) / (d_v * rho)
            out.append(FluidField(t=output_times[next_out], rho=rho.copy(), u=uu, T=TT))
            next_out += 1
        if next_out >= len(output_times):
            break
        F, uu, p = _euler_flux(U, d_v)
        a = np.abs(uu) + np.sqrt(gamma * p / rho)
        dt = cfl * dx / np.max(a)
        dt = min(dt, output_times[next_out] - t)
        if bc == "periodic":
            if flux == "kfvs":
                Fp, Fm = _kfvs_split_fluxes(U)
                Fface = Fp + np.roll(Fm, -1, axis=1)
            else:
                UL = U
                UR = np.roll(U, -1, axis=1)
                FL, _, _ = _euler_flux(UL, d_v)
                FR = np.roll(F, -1, axis=1)
                amax = np.maximum(a, np.roll(a, -1))
                Fface = 0.5 * (FL + FR) - 0.5 * amax * (UR - UL)
            U = U - dt / dx * (Fface - np.roll(Fface, 1, axis=1))
        else:  # transmissive
            Ue = np.concatenate([U[:, :1], U, U[:, -1:]], axis=1)
            if flux == "kfvs":
                Fp, Fm = _kfvs_split_fluxes(Ue)
                Fface = Fp[:, :-1] + Fm[:, 1:]
            else:
                Fe, ue, pe = _euler_flux(Ue, d_v)
                ae = np.abs(ue) + np.sqrt(gamma * pe / Ue[0])
                amax = np.maximum(ae[:-1], ae[1:])
                Fface = 0.5 * (Fe[:, :-1] + Fe[:, 1:]) - 0.5 * amax * (Ue[:, 1:] - Ue[:, :-1])
            U = U - dt / dx * (Fface[:, 1:] - Fface[:, :-1])
        t += dt
        step += 1
        rho = U[0]
        p_now = (2.0 * U[2] - U[1] ** 2 / rho) / d_v
        if np.any(rho <= 0) or np.any(p_now <= 0):
            raise AdmissibilityError(f"inadmissible state after step {step} (t={t:.4g})")
    return out


def sod_initial(z, nx, s=0.25, length=1.0):
    """Shock-tube initial moments with uncertain temperatures on [0, length]."""
    x = (np.arange(nx) + 0.5) * (length / nx)
    left = x < 0.5 * length
    rho = np.where(left, 1.0, 0.125)
    T = np.where(left, 1.0 + s * z, 0.8 + s * z)
    return x, rho, np.zeros(nx), T


def _wall_halves(grid: VelocityGrid):
    vx = grid.centers
    pos = vx > 0
    neg = vx < 0
    if grid.dim == 2:
        pos = pos[:, None] * np.ones(grid.n, dtype=bool)
        neg = neg[:, None] * np.ones(grid.n, dtype=bool)
    return pos, neg


def bgk_solve(f0, dx, grid: VelocityGrid, eps, t_final, nu=1.0, dt=None,
              bc="periodic", Tw_left=None, Tw_right=None, output_times=None):
    """First-order splitting solver for the BGK equation in 1-D space.

    Transport (upwind in x along the first velocity axis) followed by exact
    relaxation towards the local Maxwellian: f <- M + exp(-nu dt/eps) (f - M).
    f0 has shape (nx,) + grid.shape. bc is "periodic" or "walls"; with walls
    the boundary is diffusive with wall temperatures Tw_left / Tw_right
    (an unset wall temperature gives a specular-free transmissive edge).
    Returns a list of (t, f) at the output times (default: only t_final).
    """
    f = np.array(f0, dtype=float)
    nx = f.shape[0]
    vx = grid.centers  # transport velocity = first component
    vshape = (1,) + (grid.n,) + ((grid.n,) if grid.dim == 2 else ())
    vxa = vx.reshape((1, grid.n) + ((1,) if grid.dim == 2 else ()))
    cfl_dt = dx / np.max(np.abs(vx))
    if dt is None:
        dt = 0.9 * cfl_dt
    if dt > cfl_dt * (1 + 1e-12):
        raise StabilityError(f"dt={dt:.3g} violates the CFL bound {cfl_dt:.3g}")
    if output_times is None:
        output_times = [t_final]
    output_times = sorted(output_times)
    pos, neg = _wall_halves(grid)
    dvol = grid.cell_volume
    out = []
    t = 0.0
    next_out = 0
    while True:
        while next_out < len(output_times) and t >= output_times[next_out] - 1e-13:
            out.append((output_times[next_out], f.copy()))
            next_out += 1
        if next_out >= len(output_times):
            break
        step_dt = min(dt, output_times[next_out] - t)
        # transport
        if bc == "periodic":
            fm = np.roll(f, 1, axis=0)
            fp = np.roll(f, -1, axis=0)
        else:
            ghost_l = _wall_ghost(f[0], grid, Tw_left, side="left", pos=pos, neg=neg,
                                  dvol=dvol)
            ghost_r = _wall_ghost(f[-1], grid, Tw_right, side="right", pos=pos, neg=neg,
                                  dvol=dvol)
            fm = np.concatenate([ghost_l[None], f[:-1]], axis=0)
            fp = np.concatenate([f[1:], ghost_r[None]], axis=0)
        c = step_dt / dx * vxa
        f = f - np.where(c > 0, c * (f - fm), c * (fp - f))
        # relaxation, exact in time with frozen (conserved) moments
        f = _relax(f, grid, np.exp(-nu * step_dt / eps))
        t += step_dt
    return out


def _relax(f, grid, decay):
    dvol = grid.cell_volume
    comps = grid.mesh()
    rho = np.sum(f.reshape(f.shape[0], -1), axis=1) * dvol
    if np.any(rho <= 0):
        raise AdmissibilityError("nonpositive density during relaxation")
    M = np.empty_like(f)
    for i in range(f.shape[0]):
        u = np.array([np.sum(c * f[i]) * dvol / rho[i] for c in comps])
        w2 = grid.speed_sq(u)
        T = np.sum(w2 * f[i]) * dvol / (grid.dim * rho[i])
        if T <= 0:
            raise AdmissibilityError(f"nonpositive temperature in cell {i}")
        M[i] = rho[i] / (2.0 * np.pi * T) ** (grid.dim / 2.0) * np.exp(-w2 / (2.0 * T))
    return M + decay * (f - M)


def _wall_ghost(f_edge, grid, Tw, side, pos, neg, dvol):
    """Ghost state for a diffusive wall: incoming half replaced by a wall
    Maxwellian scaled to cancel the net mass flux. Without a wall temperature
    the edge is transmissive."""
    if Tw is None:
        return f_edge
    vx = grid.centers
    vxa = vx[:, None] if grid.dim == 2 else vx
    Mw = maxwellian(MomentSet(rho=1.0, u=np.zeros(grid.dim), T=float(Tw)), grid)
    ghost = np.zeros_like(f_edge)
    if side == "left":
        incoming, outgoing = pos, neg
    else:
        incoming, outgoing = neg, pos
    flux_out = np.sum(np.abs(vxa) * f_edge * outgoing) * dvol
    flux_w = np.sum(np.abs(vxa) * Mw * incoming) * dvol
    ghost[incoming] = (flux_out / flux_w) * Mw[incoming]
    # outgoing half never enters the upwind stencil; keep edge value
    ghost[outgoing] = f_edge[outgoing]
    return ghost


def swarming_drift(v, alpha, u):
    """Flux coefficient of the self-propulsion model: alpha (v^2-1) v + (v-u)."""
    return alpha * (v**2 - 1.0) * v + (v - u)


def _fp_bands(v_faces, alpha, D, u, dv):
    """Tridiagonal bands of the conservative central-difference flux divergence.

    Row i of L gives df_i/dt = (F_{i+1/2} - F_{i-1/2}) / dv with
    F = P (f_i + f_{i+1})/2 + D (f_{i+1} - f_i)/dv and zero flux at the ends.
    Returns (lower, diag, upper) such that L = tridiag(lower, diag, upper).
    """
    n = len(v_faces) + 1
    P = swarming_drift(v_faces, alpha, u)
    a_self = 0.5 * P - D / dv   # coefficient of f_i in F_{i+1/2}
    a_next = 0.5 * P + D / dv   # coefficient of f_{i+1} in F_{i+1/2}
    diag = np.zeros(n)
    lower = np.zeros(n - 1)
    upper = np.zeros(n - 1)
    diag[:-1] += a_self / dv
    upper += a_next / dv
    diag[1:] -= a_next / dv
    lower -= a_self / dv
    return lower, diag, upper


def fp_apply(f, v_faces, alpha, D, u, dv):
    """Apply the discrete Fokker-Planck operator (flux divergence) to f."""
    P = swarming_drift(v_faces, alpha, u)
    F = P * 0.5 * (f[:-1] + f[1:]) + D * (f[1:] - f[:-1]) / dv
    out = np.zeros_like(f)
    out[:-1] += F / dv
    out[1:] -= F / dv
    return out


def fokker_planck_solve(f0, grid: VelocityGrid, alpha, D, dt, t_final,
                        scheme="explicit", output_times=None):
    """Nonlinear Fokker-Planck (swarming) solver on a 1-D velocity grid.

    Conservative central differences in v; the mean velocity u(t) is
    recomputed from the discrete solution every step. scheme is "explicit"
    (Euler, requires dt <= dv^2/(2 D)) or "implicit" (backward Euler with a
    lagged u, unconditionally stable, still mass-conservative).
    """
    if grid.dim != 1:
        raise ValueError("the swarming solver is 1-D in velocity")
    if D <= 0:
        raise ValueError("diffusion coefficient must be positive")
    dv = grid.dv
    if scheme == "explicit" and dt > dv**2 / (2.0 * D) * (1 + 1e-12):
        raise StabilityError(
            f"dt={dt:.3g} violates the diffusion bound {dv**2 / (2 * D):.3g}")
    f = np.array(f0, dtype=float)
    v = grid.centers
    v_faces = v[:-1] + 0.5 * dv
    if output_times is None:
        output_times = [t_final]
    output_times = sorted(output_times)
    out = []
    t = 0.0
    next_out = 0
    n = grid.n
    while True:
        while next_out < len(output_times) and t >= output_times[next_out] - 1e-13:
            out.append((output_times[next_out], f.copy()))
            next_out += 1
        if next_out >= len(output_times):
            break
        step_dt = min(dt, output_times[next_out] - t)
        mass = np.sum(f) * dv
        u = np.sum(v * f) * dv / mass
        if scheme == "explicit":
            f = f + step_dt * fp_apply(f, v_faces, alpha, D, u, dv)
        else:
            lower, diag, upper = _fp_bands(v_faces, alpha, D, u, dv)
            ab = np.zeros((3, n))
            ab[0, 1:] = -step_dt * upper
            ab[1, :] = 1.0 - step_dt * diag
            ab[2, :-1] = -step_dt * lower
            f = solve_banded((1, 1), ab, f)
        t += step_dt
    return out

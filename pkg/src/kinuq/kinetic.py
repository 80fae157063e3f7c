"""Deterministic kinetic kernels: velocity grids, Maxwellians, moments,
the closed-form relaxation solution for Maxwell molecules and the
BGK time interpolant used as a cheap surrogate.

All quantities are nondimensional. Distribution functions are plain numpy
arrays over the grid midpoints; moments use the midpoint rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGENERATE_DENSITY = 1e-14


class DegenerateStateError(ValueError):
    """Raised when a distribution has no usable mass."""


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform midpoint grid on [-V, V]^dim, symmetric about 0."""

    dim: int
    vmax: float
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"velocity dimension must be 1 or 2, got {self.dim}")
        if self.vmax <= 0 or self.n < 2:
            raise ValueError("need vmax > 0 and at least 2 points per axis")

    @property
    def dv(self):
        return 2.0 * self.vmax / self.n

    @property
    def centers(self):
        """Midpoints along one axis, shape (n,)."""
        return -self.vmax + (np.arange(self.n) + 0.5) * self.dv

    @property
    def cell_volume(self):
        return self.dv**self.dim

    def mesh(self):
        """Velocity components on the full grid: tuple of dim arrays."""
        c = self.centers
        if self.dim == 1:
            return (c,)
        vx, vy = np.meshgrid(c, c, indexing="ij")
        return (vx, vy)

    def speed_sq(self, u=None):
        """|v - u|^2 on the grid. u defaults to 0."""
        comps = self.mesh()
        if u is None:
            u = np.zeros(self.dim)
        u = np.atleast_1d(np.asarray(u, dtype=float))
        return sum((c - ui) ** 2 for c, ui in zip(comps, u))

    @property
    def shape(self):
        return (self.n,) * self.dim


@dataclass(frozen=True)
class MomentSet:
    """Density, mean velocity, temperature plus derived energy and pressure."""

    rho: float
    u: np.ndarray
    T: float

    def __post_init__(self):
        object.__setattr__(self, "u", np.atleast_1d(np.asarray(self.u, dtype=float)))

    @property
    def d_v(self):
        return len(self.u)

    @property
    def E(self):
        return 0.5 * self.rho * float(self.u @ self.u) + 0.5 * self.d_v * self.rho * self.T

    @property
    def p_pressure(self):
        return self.rho * self.T


def maxwellian(mom: MomentSet, grid: VelocityGrid) -> np.ndarray:
    """Maxwellian with the given moments, evaluated on the grid midpoints."""
    if mom.rho <= 0 or mom.T <= 0:
        raise ValueError(f"maxwellian needs rho > 0 and T > 0, got rho={mom.rho}, T={mom.T}")
    if mom.d_v != grid.dim:
        raise ValueError("moment dimension does not match the grid")
    w2 = grid.speed_sq(mom.u)
    return mom.rho / (2.0 * np.pi * mom.T) ** (grid.dim / 2.0) * np.exp(-w2 / (2.0 * mom.T))


def moments(f: np.ndarray, grid: VelocityGrid) -> MomentSet:
    """Midpoint-rule density, mean velocity and temperature of f."""
    dv = grid.cell_volume
    rho = float(np.sum(f)) * dv
    if rho < DEGENERATE_DENSITY:
        raise DegenerateStateError(f"density {rho:.3e} too small to normalize moments")
    comps = grid.mesh()
    u = np.array([float(np.sum(c * f)) * dv / rho for c in comps])
    w2 = grid.speed_sq(u)
    T = float(np.sum(w2 * f)) * dv / (grid.dim * rho)
    return MomentSet(rho=rho, u=u, T=T)


def entropy(f: np.ndarray, grid: VelocityGrid) -> float:
    """Discrete Boltzmann entropy integral of f log f (zero cells contribute 0)."""
    pos = f > 0
    return float(np.sum(f[pos] * np.log(f[pos]))) * grid.cell_volume


def bkw_exact(z: float, t: float, alpha_fn, grid: VelocityGrid) -> np.ndarray:
    """Closed-form relaxation solution for 2-D Maxwell molecules.

    f(z,v,t) = 1/(2 pi s) [1 - (1-a s)/(a s) (1 - v^2/(2 s))] exp(-v^2/(2 s))
    with s(z,t) = (2 - exp(-t/8)) / (2 a(z)) and a = alpha_fn(z).  The family
    has unit mass, zero momentum and temperature 1/a; it tends to the
    Maxwellian with T = 1/a as t grows.
    """
    if grid.dim != 2:
        raise ValueError("the exact Maxwell-molecule solution is 2-D in velocity")
    a = float(alpha_fn(z))
    if a < 1.0:
        raise ValueError(f"alpha(z) = {a} < 1 can produce negative values of f")
    s = (2.0 - np.exp(-t / 8.0)) / (2.0 * a)
    v2 = grid.speed_sq()
    g = np.exp(-v2 / (2.0 * s))
    c = (1.0 - a * s) / (a * s)
    return (1.0 - c * (1.0 - v2 / (2.0 * s))) * g / (2.0 * np.pi * s)


def bkw_fourth_moment(z: float, t: float, alpha_fn) -> float:
    """Exact fourth velocity moment of the 2-D relaxation solution."""
    a = float(alpha_fn(z))
    s = (2.0 - np.exp(-t / 8.0)) / (2.0 * a)
    c = (1.0 - a * s) / (a * s)
    return 8.0 * s**2 * (1.0 + 2.0 * c)


def bgk_interpolant(f0: np.ndarray, finf: np.ndarray, t: float) -> np.ndarray:
    """Relaxation-in-time surrogate exp(-t) f0 + (1 - exp(-t)) finf."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if f0.shape != finf.shape:
        raise ValueError("initial and equilibrium states live on different grids")
    w = np.exp(-t)
    return w * f0 + (1.0 - w) * finf


def two_bump_initial(z: float, grid: VelocityGrid, s=0.2, rho0=0.125, sigma=0.5):
    """Two-bump initial state with an uncertain bump location.

    rho0/(2 pi) [exp(-|v-(2+s z)|^2/sigma) + exp(-|v+(1+s z)|^2/sigma)], d_v = 2.
    """
    if grid.dim != 2:
        raise ValueError("the two-bump initial state is 2-D in velocity")
    vx, vy = grid.mesh()
    c1 = 2.0 + s * z
    c2 = 1.0 + s * z
    b1 = np.exp(-((vx - c1) ** 2 + vy**2) / sigma)
    b2 = np.exp(-((vx + c2) ** 2 + vy**2) / sigma)
    return rho0 / (2.0 * np.pi) * (b1 + b2)


def quasi_equilibrium(alpha: float, u: float, D: float, grid: VelocityGrid) -> np.ndarray:
    """Flux-annihilating state of the self-propulsion Fokker-Planck model.

    C exp{-(1/D) [alpha v^4/4 + (1-alpha) v^2/2 - u v]} normalized to unit
    mass on the grid; alpha = 0 reduces to a Gaussian with variance D.
    """
    if D <= 0:
        raise ValueError(f"diffusion coefficient must be positive, got {D}")
    if grid.dim != 1:
        raise ValueError("the swarming quasi-equilibrium is 1-D in velocity")
    v = grid.centers
    expo = -(alpha * v**4 / 4.0 + (1.0 - alpha) * v**2 / 2.0 - u * v) / D
    f = np.exp(expo - expo.max())
    return f / (np.sum(f) * grid.dv)

"""Hybrid particle methods whose particle state is a vector of gPC
coefficients: mean-field particle dynamics with random-subset interactions
and a Nanbu-type collisional Monte Carlo method for Maxwell molecules.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .uq_random import GpcBasis, project

DEFAULT_MATRIX_CAP_BYTES = 8 * 1024**3


@dataclass
class GpcParticleEnsemble:
    """Particles carrying gPC coefficient vectors.

    V has shape (N, d_v, M+1); X is None for space-homogeneous problems,
    otherwise (N, d_x, M+1). The mode index is last.
    """

    V: np.ndarray
    basis: GpcBasis
    X: np.ndarray | None = None
    seed: int | None = None

    @property
    def count(self):
        return self.V.shape[0]

    @property
    def d_v(self):
        return self.V.shape[1]

    def velocities_at(self, z):
        """Reconstruct particle velocities at z (scalar or nodes): shape
        z.shape + (N, d_v) transposed to (N, d_v) for scalar z."""
        phi = self.basis.eval(z)  # z.shape + (K,)
        return np.tensordot(phi, self.V, axes=(-1, -1))  # z.shape + (N, d_v)


def init_gpc_particles(n, basis: GpcBasis, seed, base_sampler,
                       scale_fn=None, shift_fn=None):
    """Build a gPC particle ensemble from a z-parameterized scaling family
    v_i(z) = scale(z) w_i + shift(z).

    base_sampler(n, rng) draws the base velocities w_i, shape (n, d_v).
    Missing scale/shift default to 1/0, giving a deterministic ensemble with
    only mode 0 populated.
    """
    rng = np.random.default_rng(seed)
    w = np.asarray(base_sampler(n, rng), dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    nodes = basis.nodes
    scale = np.ones(len(nodes)) if scale_fn is None else scale_fn(nodes) * np.ones(len(nodes))
    shift = np.zeros(len(nodes)) if shift_fn is None else shift_fn(nodes) * np.ones(len(nodes))
    scale_hat = project(scale, basis).coeffs  # (K,)
    shift_hat = project(shift, basis).coeffs
    V = w[:, :, None] * scale_hat[None, None, :] + shift_hat[None, None, :]
    return GpcParticleEnsemble(V=V, basis=basis, seed=seed)


def init_gpc_particles_icdf(n, basis: GpcBasis, seed, icdf, d_v=1):
    """Quadrature-node resampling with common uniform draws: particle i at
    node z_h is icdf(z_h, u_i) with one shared u_i per particle (and
    component), then projected."""
    rng = np.random.default_rng(seed)
    u = rng.random((n, d_v))
    nodes = basis.nodes
    nodal = np.stack([np.asarray(icdf(z, u), dtype=float) for z in nodes])  # (H, n, d_v)
    V = np.moveaxis(project(nodal, basis).coeffs, 0, -1)  # (n, d_v, K)
    return GpcParticleEnsemble(V=V, basis=basis, seed=seed)


@dataclass
class InteractionConfig:
    """Mean-field / collisional interaction parameters."""

    dt: float
    subset_size: int | None = None   # S; None means the full interaction
    P_fn: object = None              # P(z) or P(z, x, x*) interaction kernel
    D_fn: object = None              # diffusion D(z); None or 0 disables noise
    mu: float = 1.0                  # Maxwell-molecule collision rate

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")


def _interaction_tensor(P_fn, basis):
    """E[P(z) Phi_h Phi_k] for a space-independent kernel."""
    pz = np.asarray(P_fn(basis.nodes), dtype=float) * np.ones(basis.n_nodes)
    phi = basis.node_values
    return (phi * (basis.weights * pz)[:, None]).T @ phi


def _diffusion_modes(D_fn, basis):
    """D_h = E[sqrt(2 D(z)) Phi_h]."""
    if D_fn is None:
        return None
    dz = np.asarray(D_fn(basis.nodes), dtype=float) * np.ones(basis.n_nodes)
    if np.all(dz == 0.0):
        return None
    return project(np.sqrt(2.0 * dz), basis).coeffs


def sample_subsets(n, size, rng):
    """One subset of `size` distinct partners (self excluded) per particle,
    shape (n, size)."""
    if size > n - 1:
        raise ValueError(f"subset size {size} exceeds the {n - 1} available partners")
    r = rng.random((n, n))
    np.fill_diagonal(r, np.inf)
    return np.argpartition(r, size, axis=1)[:, :size]


def particle_sg_drift(ensemble: GpcParticleEnsemble, config: InteractionConfig,
                      subsets=None):
    """Interaction drift (per unit time) of every particle's coefficients.

    subsets is an (N, S) index array; None uses the full interaction over the
    N - 1 partners with the matching 1/(N - 1) normalization, which is the
    expectation of the subset drift for any S.
    """
    V = ensemble.V
    n = ensemble.count
    basis = ensemble.basis
    P = _interaction_tensor(config.P_fn, basis) if config.P_fn is not None \
        else np.eye(basis.n_modes)
    if subsets is None:
        acc = np.sum(V, axis=0)[None] - n * V  # sum over j != i of V_j - V_i
        return np.einsum("kh,idk->idh", P, acc) / (n - 1)
    S = subsets.shape[1]
    diff = V[subsets] - V[:, None]          # (N, S, d_v, K)
    acc = np.sum(diff, axis=1)              # (N, d_v, K)
    return np.einsum("kh,idk->idh", P, acc) / S


def particle_sg_step(ensemble: GpcParticleEnsemble, config: InteractionConfig,
                     rng) -> GpcParticleEnsemble:
    """Euler-Maruyama update of all particle coefficients.

    Velocity: V <- V + dt * subset drift + sqrt(dt) D_h eta_i with one
    standard normal eta per particle and component, shared across modes.
    Position (when present): X <- X + V dt.
    """
    n = ensemble.count
    S = config.subset_size
    if S is not None and S > n:
        raise ValueError(f"subset size {S} exceeds ensemble size {n}")
    if S is None or S >= n:
        subsets = None  # full interaction, 1/N normalization
    else:
        subsets = sample_subsets(n, S, rng)
    drift = particle_sg_drift(ensemble, config, subsets)
    V = ensemble.V + config.dt * drift
    D_h = _diffusion_modes(config.D_fn, ensemble.basis)
    if D_h is not None:
        eta = rng.standard_normal((n, ensemble.d_v))
        V = V + np.sqrt(config.dt) * eta[:, :, None] * D_h[None, None, :]
    X = None if ensemble.X is None else ensemble.X + config.dt * ensemble.V
    return GpcParticleEnsemble(V=V, basis=ensemble.basis, X=X, seed=ensemble.seed)


def particle_moment(ensemble: GpcParticleEnsemble, phi_fn) -> np.ndarray:
    """gPC coefficients of the ensemble moment (1/N) sum_i phi(V_i^M(z)).

    phi_fn maps velocities (N, d_v) to per-particle scalars.
    """
    nodes = ensemble.basis.nodes
    vals = np.empty(len(nodes))
    for q, z in enumerate(nodes):
        vz = ensemble.velocities_at(z)
        vals[q] = float(np.mean(phi_fn(vz)))
    return project(vals, ensemble.basis).coeffs


def reconstruct_density(ensemble: GpcParticleEnsemble, edges, axis=0):
    """Histogram density of one velocity component per quadrature node,
    projected onto the basis.

    Returns coefficients of shape (M+1, nbins); mode 0 integrates to 1 up to
    the mass falling outside the binning range.
    """
    nodes = ensemble.basis.nodes
    nb = len(edges) - 1
    widths = np.diff(edges)
    nodal = np.empty((len(nodes), nb))
    for q, z in enumerate(nodes):
        vz = ensemble.velocities_at(z)[:, axis]
        counts, _ = np.histogram(vz, bins=edges)
        nodal[q] = counts / (ensemble.count * widths)
    return project(nodal, ensemble.basis).coeffs


@dataclass
class CollisionMatrix:
    """gPC coefficients of the pairwise relative speeds |v_i^M(z) - v_j^M(z)|.

    Either precomputed for all pairs (condensed upper-triangular storage) or
    evaluated on the fly by Gauss quadrature with n_quad nodes.
    """

    basis: GpcBasis
    n: int
    entries: np.ndarray | None = None      # (n (n-1) / 2, M+1) or None
    n_quad: int | None = None              # on-the-fly quadrature size
    _quad: tuple = field(default=None, repr=False)

    @property
    def precomputed(self):
        return self.entries is not None

    def _pair_index(self, i, j):
        i = np.asarray(i)
        j = np.asarray(j)
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        return lo * (2 * self.n - lo - 1) // 2 + (hi - lo - 1)

    def get_pairs(self, i, j, V=None):
        """Coefficient vectors for the pairs (i, j): shape (npairs, M+1)."""
        if self.precomputed:
            return self.entries[self._pair_index(i, j)]
        nodes, weights, phi = self._quad
        vi = np.tensordot(V[i], phi, axes=(-1, -1))   # (npairs, d_v, H)
        vj = np.tensordot(V[j], phi, axes=(-1, -1))
        rel = np.sqrt(np.sum((vi - vj) ** 2, axis=1))  # (npairs, H)
        return (rel * weights[None]) @ phi             # (npairs, M+1)


def build_collision_matrix(ensemble: GpcParticleEnsemble, mode="precomputed",
                           n_quad=None, memory_cap=DEFAULT_MATRIX_CAP_BYTES) -> CollisionMatrix:
    """Relative-speed coefficient matrix for DSMC-SG collisions.

    "precomputed" projects |v_i^M - v_j^M| for every pair once with the basis
    quadrature (invariant under Maxwell-molecule collisions); if the storage
    estimate exceeds memory_cap the on-the-fly mode is forced. "on_the_fly"
    stores only the quadrature (default M+1 nodes, enough for an exact
    degree-M projection of nodal reconstructions).
    """
    basis = ensemble.basis
    n = ensemble.count
    K = basis.n_modes
    est_bytes = n * (n - 1) // 2 * K * 8
    if mode == "precomputed" and est_bytes > memory_cap:
        mode = "on_the_fly"
    if mode == "on_the_fly":
        H = n_quad if n_quad is not None else basis.degree + 1
        from .uq_random import build_basis
        qb = build_basis(basis.spec, basis.degree, H)
        quad = (qb.nodes, qb.weights, basis.eval(qb.nodes))
        return CollisionMatrix(basis=basis, n=n, entries=None, n_quad=H, _quad=quad)
    phi = basis.node_values  # (H, K)
    vz = np.tensordot(ensemble.V, phi, axes=(-1, -1))  # (N, d_v, H)
    iu, ju = np.triu_indices(n, k=1)
    rel = np.sqrt(np.sum((vz[iu] - vz[ju]) ** 2, axis=1))  # (npairs, H)
    entries = (rel * basis.weights[None]) @ phi
    return CollisionMatrix(basis=basis, n=n, entries=entries)


def iround_stochastic(x, rng):
    """floor(x) + 1 with probability frac(x): keeps the expectation exact."""
    base = int(np.floor(x))
    return base + int(rng.random() < (x - base))


def dsmc_sg_step(ensemble: GpcParticleEnsemble, matrix: CollisionMatrix,
                 config: InteractionConfig, rng) -> GpcParticleEnsemble:
    """One Nanbu collision step on the gPC coefficients.

    N_c = iround(mu N dt / 2) disjoint pairs collide; each pair shares one
    scattering direction omega across all modes:
        v_i' = (v_i + v_j)/2 + (1/2) Vhat_ij omega.
    Per-mode pair momentum is conserved exactly.
    """
    n = ensemble.count
    nc_mean = config.mu * n * config.dt / 2.0
    if nc_mean > n / 2.0:
        raise ValueError("mu N dt / 2 exceeds the number of available pairs")
    n_c = iround_stochastic(nc_mean, rng)
    V = ensemble.V.copy()
    if n_c > 0:
        perm = rng.permutation(n)
        i = perm[:n_c]
        j = perm[n_c:2 * n_c]
        if ensemble.d_v == 2:
            theta = rng.uniform(0.0, 2.0 * np.pi, n_c)
            omega = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        else:
            omega = (2.0 * (rng.random(n_c) < 0.5) - 1.0)[:, None]
        Vm = matrix.get_pairs(i, j, V=ensemble.V)  # (n_c, K)
        center = 0.5 * (V[i] + V[j])               # (n_c, d_v, K)
        kick = 0.5 * omega[:, :, None] * Vm[:, None, :]
        V[i] = center + kick
        V[j] = center - kick
    return GpcParticleEnsemble(V=V, basis=ensemble.basis, X=ensemble.X,
                               seed=ensemble.seed)


def bkw_base_sampler(n, rng):
    """2-D samples of the ring state r^2 ~ chi^2_4 (the t = 0 relaxation
    profile at unit scale), isotropic."""
    r = np.sqrt(rng.chisquare(4, n))
    theta = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)


def dsmc_sg_run(alpha_fn, n, basis: GpcBasis, dt, t_final, seed, mu=1.0,
                matrix_mode="on_the_fly", record_every=1):
    """DSMC-SG simulation of the Maxwell-molecule relaxation with uncertain
    temperature (initial data from the exact-solution family at t = 0).

    Returns a dict with the times, the fourth-moment coefficient trajectory
    (steps, M+1) and the per-mode mean-velocity trajectory (steps, d_v, M+1).
    """
    rng = np.random.default_rng(seed)
    ens = init_gpc_particles(
        n, basis, seed=rng.integers(2**63), base_sampler=bkw_base_sampler,
        scale_fn=lambda z: 1.0 / np.sqrt(2.0 * alpha_fn(z)))
    matrix = build_collision_matrix(ens, mode=matrix_mode)
    config = InteractionConfig(dt=dt, mu=mu)
    n_steps = int(round(t_final / dt))
    times, m4, mom = [], [], []

    def record(t):
        times.append(t)
        m4.append(particle_moment(ens, lambda v: np.sum(v**2, axis=1) ** 2))
        mom.append(np.mean(ens.V, axis=0))

    record(0.0)
    for step in range(n_steps):
        ens = dsmc_sg_step(ens, matrix, config, rng)
        if (step + 1) % record_every == 0 or step == n_steps - 1:
            record((step + 1) * dt)
    return {
        "t": np.array(times),
        "m4": np.stack(m4),
        "momentum": np.stack(mom),
        "ensemble": ens,
    }

"""Random input modeling: distributions, sampling, orthonormal polynomial bases.

The random input is a scalar z with a uniform or gaussian law. Orthonormal
polynomial families are built from the three-term recurrence of the monic
orthogonal polynomials; quadrature nodes and weights come from the
eigen-decomposition of the Jacobi matrix (Golub-Welsch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal


@dataclass(frozen=True)
class UncertaintySpec:
    """Law of the scalar random input z.

    kind is "uniform" (support [a, b]) or "gaussian" (mean, stdev).
    """

    kind: str
    a: float = -1.0
    b: float = 1.0
    mean: float = 0.0
    stdev: float = 1.0

    def __post_init__(self):
        if self.kind == "uniform":
            if not self.a < self.b:
                raise ValueError(f"uniform spec requires a < b, got a={self.a}, b={self.b}")
        elif self.kind == "gaussian":
            if not self.stdev > 0:
                raise ValueError(f"gaussian spec requires stdev > 0, got {self.stdev}")
        else:
            raise ValueError(f"unknown distribution kind {self.kind!r}")

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "uniform":
            inside = (z >= self.a) & (z <= self.b)
            return np.where(inside, 1.0 / (self.b - self.a), 0.0)
        s = self.stdev
        return np.exp(-0.5 * ((z - self.mean) / s) ** 2) / (s * math.sqrt(2.0 * math.pi))

    def recurrence(self, n):
        """First n coefficients (alpha_k, beta_k) of the monic orthogonal family.

        beta_0 = integral of the PDF = 1.  Uniform uses shifted/scaled Legendre,
        gaussian the probabilists' Hermite family.
        """
        k = np.arange(n, dtype=float)
        if self.kind == "uniform":
            half = 0.5 * (self.b - self.a)
            alpha = np.full(n, 0.5 * (self.a + self.b))
            beta = np.empty(n)
            beta[0] = 1.0
            if n > 1:
                kk = k[1:]
                beta[1:] = half**2 * kk**2 / (4.0 * kk**2 - 1.0)
        else:
            alpha = np.full(n, self.mean)
            beta = np.empty(n)
            beta[0] = 1.0
            beta[1:] = k[1:] * self.stdev**2
        return alpha, beta

    def sample(self, count, rng):
        if self.kind == "uniform":
            return rng.uniform(self.a, self.b, size=count)
        return rng.normal(self.mean, self.stdev, size=count)

    def to_dict(self):
        if self.kind == "uniform":
            return {"kind": "uniform", "a": self.a, "b": self.b}
        return {"kind": "gaussian", "mean": self.mean, "stdev": self.stdev}

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "uniform":
            return cls(kind="uniform", a=float(d["a"]), b=float(d["b"]))
        return cls(kind="gaussian", mean=float(d["mean"]), stdev=float(d["stdev"]))


def sample_z(spec: UncertaintySpec, count: int, seed) -> np.ndarray:
    """Draw count i.i.d. samples of z. Same seed gives a bit-identical sequence."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return spec.sample(count, rng)


@dataclass(frozen=True)
class GpcBasis:
    """Orthonormal polynomial family for an UncertaintySpec with its Gauss rule.

    The members Phi_0..Phi_M satisfy <Phi_m, Phi_n>_p = delta_mn, Phi_m has
    exact degree m and Phi_0 = 1. nodes/weights form an H-point Gauss rule
    exact for polynomials of degree <= 2H-1.
    """

    spec: UncertaintySpec
    degree: int
    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_modes(self):
        return self.degree + 1

    @property
    def n_nodes(self):
        return len(self.nodes)

    def eval(self, z):
        """Evaluate Phi_0..Phi_M at z via the three-term recurrence.

        Returns an array of shape z.shape + (M+1,).
        """
        z = np.asarray(z, dtype=float)
        out = np.empty(z.shape + (self.degree + 1,))
        sq = np.sqrt(self.beta)
        out[..., 0] = 1.0
        if self.degree >= 1:
            out[..., 1] = (z - self.alpha[0]) / sq[1]
        for m in range(1, self.degree):
            out[..., m + 1] = (
                (z - self.alpha[m]) * out[..., m] - sq[m] * out[..., m - 1]
            ) / sq[m + 1]
        return out

    @property
    def node_values(self):
        """Phi values at the quadrature nodes, shape (H, M+1)."""
        return self.eval(self.nodes)

    def quad(self, values_at_nodes):
        """Integrate a function given at the nodes against the PDF."""
        values = np.asarray(values_at_nodes, dtype=float)
        return np.tensordot(self.weights, values, axes=(0, 0))


def build_basis(spec: UncertaintySpec, M: int, H: int | None = None) -> GpcBasis:
    """Build the degree-M orthonormal basis with an H-point Gauss rule.

    Default H = 2(M+1) so products of two basis members are integrated exactly.
    """
    if M < 0:
        raise ValueError(f"degree M must be >= 0, got {M}")
    if H is None:
        H = 2 * (M + 1)
    if H <= M:
        raise ValueError(f"quadrature size H={H} cannot resolve degree M={M} (need H >= M+1)")
    alpha, beta = spec.recurrence(max(M + 1, H))
    # Golub-Welsch on the symmetric tridiagonal Jacobi matrix
    evals, evecs = eigh_tridiagonal(alpha[:H], np.sqrt(beta[1:H]))
    nodes = evals
    weights = beta[0] * evecs[0, :] ** 2
    return GpcBasis(spec=spec, degree=M, alpha=alpha, beta=beta,
                    nodes=nodes, weights=weights)


@dataclass(frozen=True)
class GpcCoeffs:
    """Coefficients of a degree-M expansion in an orthonormal basis.

    coeffs has the mode index first; trailing axes (if any) are field points.
    """

    coeffs: np.ndarray
    basis: GpcBasis

    def evaluate(self, z):
        """Reconstruct the expansion at z (scalar or array)."""
        phi = self.basis.eval(z)  # z.shape + (M+1,)
        return np.tensordot(phi, self.coeffs, axes=(-1, 0))


def project(values_at_nodes, basis: GpcBasis) -> GpcCoeffs:
    """Project nodal values onto the basis: u_m = sum_h w_h u(z_h) Phi_m(z_h)."""
    values = np.asarray(values_at_nodes, dtype=float)
    if values.shape[0] != basis.n_nodes:
        raise ValueError(
            f"expected values at {basis.n_nodes} quadrature nodes, got {values.shape[0]}"
        )
    wphi = basis.node_values * basis.weights[:, None]  # (H, M+1)
    coeffs = np.tensordot(wphi, values, axes=(0, 0))  # (M+1, ...)
    return GpcCoeffs(coeffs=coeffs, basis=basis)


def _coeff_array(coeffs):
    return coeffs.coeffs if isinstance(coeffs, GpcCoeffs) else np.asarray(coeffs, dtype=float)


def gpc_mean(coeffs):
    """Expectation of the expansion: the mode-0 coefficient."""
    return _coeff_array(coeffs)[0]


def gpc_variance(coeffs):
    """Variance of the expansion: sum of squared coefficients minus the mean squared."""
    c = _coeff_array(coeffs)
    return np.sum(c**2, axis=0) - c[0] ** 2


def gpc_space_dimension(d_z: int, M: int) -> int:
    """Degrees of freedom of the total-degree-M polynomial space in d_z variables."""
    if d_z < 1:
        raise ValueError(f"d_z must be >= 1, got {d_z}")
    if M < 0:
        raise ValueError(f"M must be >= 0, got {M}")
    return math.comb(d_z + M, M)

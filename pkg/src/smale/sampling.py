"""Gaussian ensembles on systems and the solution-variety sampler.

Complex Gaussians follow the convention that real and imaginary parts of every
BW coordinate are independent N(mean, sigma^2), so that ||f||^2 of a standard
Gaussian system is chi-square with 2N degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import (
    DegreePattern,
    PolySystem,
    evaluate_with_jacobian,
    linear_power,
    monomials,
    mul_linear,
)
from .errors import PreconditionError

KERNEL_TOL = 1e-10


@dataclass(frozen=True)
class GaussianSpec:
    mean: PolySystem
    sigma: float
    truncation: Optional[float] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise PreconditionError(f"sigma must be positive, got {self.sigma}")
        if self.truncation is not None and not self.truncation > 0:
            raise PreconditionError(f"truncation radius must be positive, got {self.truncation}")

    @classmethod
    def standard(cls, pattern: DegreePattern) -> "GaussianSpec":
        return cls(PolySystem.zeros(pattern), 1.0)

    @classmethod
    def smoothed(cls, center: PolySystem, sigma: float) -> "GaussianSpec":
        """Gaussian around ``center`` truncated at radius sqrt(2N)."""
        return cls(center, sigma, math.sqrt(2 * center.pattern.N))


@dataclass(frozen=True)
class DecompositionTriple:
    k: PolySystem
    M: np.ndarray
    h: PolySystem


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal(shape + (2,) if isinstance(shape, tuple) else (shape, 2))
    return z[..., 0] + 1j * z[..., 1]


def sample_gaussian(spec: GaussianSpec, rng: np.random.Generator) -> PolySystem:
    pattern = spec.mean.pattern
    while True:
        noise = spec.sigma * complex_normal(rng, pattern.N)
        if spec.truncation is None or np.linalg.norm(noise) <= spec.truncation:
            return PolySystem.from_vector(pattern, spec.mean.vector + noise)


def sample_real_gaussian(pattern: DegreePattern, rng: np.random.Generator) -> PolySystem:
    """Standard Gaussian on real systems: real BW coordinates i.i.d. N(0, 1)."""
    return PolySystem.from_vector(pattern, rng.standard_normal(pattern.N).astype(complex))


def _power_of_dual(zeta: np.ndarray, n: int, d: int) -> np.ndarray:
    """Monomial coefficients of <X, zeta>^d = (sum_j conj(zeta_j) X_j)^d."""
    return linear_power(np.conj(zeta), n, d)


def build_g(M: np.ndarray, zeta: np.ndarray, pattern: DegreePattern) -> PolySystem:
    """The system (sqrt(d_i) <X, zeta>^{d_i - 1} l_i) with l_i(X) = sum_j M[i, j] X_j."""
    M = np.asarray(M, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    n = pattern.n
    if M.shape != (n, n + 1):
        raise PreconditionError(f"M must be {n}x{n + 1}, got {M.shape}")
    if np.linalg.norm(M @ zeta) > KERNEL_TOL * max(1.0, np.linalg.norm(M)):
        raise PreconditionError("rows of M must vanish at zeta")
    return _build_g_unchecked(M, zeta, pattern)


def decompose(f: PolySystem, zeta: np.ndarray) -> DecompositionTriple:
    """Split f into its components in C_zeta, L_zeta (as a matrix) and R_zeta."""
    pattern = f.pattern
    n = pattern.n
    zeta = np.asarray(zeta, dtype=complex)
    vals, jac = evaluate_with_jacobian(f, zeta)
    degs = np.asarray(pattern.degrees, dtype=float)
    M = (jac - (degs * vals)[:, None] * np.conj(zeta)[None, :]) / np.sqrt(degs)[:, None]
    k_blocks = []
    for i, d in enumerate(pattern.degrees):
        k_blocks.append(vals[i] * _power_of_dual(zeta, n, d) / monomials(n, d).sqrt_multinomial)
    k = PolySystem(pattern, k_blocks)
    g = _build_g_unchecked(M, zeta, pattern)
    return DecompositionTriple(k, M, f - k - g)


def _build_g_unchecked(M, zeta, pattern):
    n = pattern.n
    blocks = []
    for i, d in enumerate(pattern.degrees):
        mono = math.sqrt(d) * mul_linear(_power_of_dual(zeta, n, d - 1), n, d - 1, M[i])
        blocks.append(mono / monomials(n, d).sqrt_multinomial)
    return PolySystem(pattern, blocks)


def sample_rho_st(pattern: DegreePattern, rng: np.random.Generator) -> tuple[PolySystem, np.ndarray]:
    """Draw (g, zeta): g standard Gaussian, zeta one of its zeros chosen uniformly.

    Draws a Gaussian matrix M, takes its kernel line, randomizes the phase of the
    representative, lifts M to the system g_{M, zeta} and adds the R_zeta part
    of an independent standard Gaussian system.
    """
    n = pattern.n
    while True:
        M = complex_normal(rng, (n, n + 1))
        _, s, vh = np.linalg.svd(M)
        if s[-1] > 1e-12 * s[0]:
            break
    zeta = np.conj(vh[-1])
    zeta = zeta / np.linalg.norm(zeta)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    zeta = zeta * np.exp(1j * theta)
    g1 = _build_g_unchecked(M, zeta, pattern)
    h = decompose(sample_gaussian(GaussianSpec.standard(pattern), rng), zeta).h
    return g1 + h, zeta

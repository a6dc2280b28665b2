"""Projective Newton iteration, the normalized condition number and certification."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .algebra import PolySystem, evaluate, proj_distance
from .errors import PreconditionError, SingularJacobianError

# Stop refining once successive iterates are this close (radians).
REFINE_TOL = 1e-14


@dataclass(frozen=True)
class AlhParams:
    """Constants of the adaptive linear homotopy.

    ``lam`` is the step-size parameter, ``C`` and ``eps`` the constants of the
    condition-number stability estimate it is derived from, and ``u0`` the radius
    constant of the gamma-theorem.
    """

    lam: float = 7.53e-3
    C: float = 0.025
    eps: float = 0.13
    u0: float = 3.0 - math.sqrt(7.0)
    max_iters: int = 10_000_000
    newton_refine_steps: int = 20
    frobenius: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.newton_refine_steps < 0:
            raise ValueError("newton_refine_steps must be non-negative")

    def lam_admissible(self) -> bool:
        return self.lam <= self.C * (1 - self.eps) / (2 * (1 + self.eps) ** 3)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConditionReport:
    mu_per_zero: tuple[float, ...]
    mu_max: float
    mu2: float

    def to_dict(self) -> dict:
        return {"mu": list(self.mu_per_zero), "mu_max": self.mu_max, "mu2": self.mu2}


def _point(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=complex)


def newton_step(f: PolySystem, x: np.ndarray) -> np.ndarray:
    """One step of projective Newton, returned with unit norm."""
    E, blk, _ = f.pattern._flat
    xn, ok = _kernels.newton_step(f.monomial_vector, E, blk, f.pattern.n, f.pattern.D, _point(x))
    if not ok:
        raise SingularJacobianError("Df(x) restricted to T_x is singular")
    return xn


def mu_norm(f: PolySystem, x: np.ndarray, *, frobenius: bool = False) -> float:
    """Normalized condition number of f at the point x (taken with unit norm).

    Returns ``inf`` when the restricted Jacobian is singular.  With
    ``frobenius=True`` the Frobenius norm replaces the spectral norm.
    """
    x = _point(x)
    x = x / np.linalg.norm(x)
    E, blk, _ = f.pattern._flat
    return float(
        _kernels.mu_norm(
            f.monomial_vector, E, blk, f.pattern.n, f.pattern.D,
            f.pattern.inv_sqrt_degrees, f.norm, x, frobenius,
        )
    )


@dataclass(frozen=True)
class Certificate:
    certified: bool
    ill_posed: bool
    # D^{3/2} * mu * d_P, compared against u0
    value: float


def certificate(f: PolySystem, x: np.ndarray, zeta: np.ndarray, u0: float = AlhParams.u0) -> Certificate:
    mu = mu_norm(f, zeta)
    if not math.isfinite(mu):
        return Certificate(False, True, math.inf)
    value = f.pattern.D ** 1.5 * mu * proj_distance(x, zeta)
    return Certificate(value <= u0, False, value)


def certify(f: PolySystem, x: np.ndarray, zeta_refined: np.ndarray, u0: float = AlhParams.u0) -> bool:
    """Gamma-theorem test: is x an approximate zero associated with zeta_refined?"""
    return certificate(f, x, zeta_refined, u0).certified


def newton_refine(f: PolySystem, x: np.ndarray, steps: int) -> np.ndarray:
    x = _point(x)
    x = x / np.linalg.norm(x)
    for _ in range(steps):
        nxt = newton_step(f, x)
        done = proj_distance(nxt, x) <= REFINE_TOL
        x = nxt
        if done:
            break
    return x


def relative_residual(f: PolySystem, x: np.ndarray) -> float:
    """||f(x)|| / (||f|| ||x||^D); at most 1 for every x."""
    x = _point(x)
    nx = np.linalg.norm(x)
    return float(np.linalg.norm(evaluate(f, x / nx)) / f.norm)


def newton_contraction(f: PolySystem, x: np.ndarray, zeta: np.ndarray, iterations: int) -> list[float]:
    """Distances d_P(x_i, zeta) for the Newton iterates x_0 = x, ..., x_iterations."""
    out = [proj_distance(x, zeta)]
    for _ in range(iterations):
        x = newton_step(f, x)
        out.append(proj_distance(x, zeta))
    return out


def converges_quadratically(distances: Sequence[float], floor: float = 1e-13) -> bool:
    """Check d_i <= 2^{1 - 2^i} d_0, ignoring iterates already at rounding level."""
    d0 = distances[0]
    for i, d in enumerate(distances):
        bound = 0.5 ** (2 ** i - 1) * d0
        if d > max(bound, floor):
            return False
    return True


def mu2_and_max(f: PolySystem, zeros: Sequence[np.ndarray]) -> ConditionReport:
    """Per-zero condition numbers, their maximum and root mean square."""
    if len(zeros) == 0:
        raise PreconditionError("need at least one zero")
    mus = [mu_norm(f, z) for z in zeros]
    arr = np.asarray(mus)
    return ConditionReport(tuple(mus), float(arr.max()), float(np.sqrt(np.mean(arr ** 2))))

"""End-to-end solvers: randomized LV, deterministic MD, all-zeros continuation."""

from __future__ import annotations

import cmath
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Optional, Sequence, Union

import numpy as np

from ._parallel import pmap
from .algebra import (
    DegreePattern,
    PolySystem,
    monomials,
    point_to_list,
    proj_distance,
    system_to_dict,
)
from .errors import (
    NonConvergenceError,
    PreconditionError,
    SingularJacobianError,
    UnreliableCountError,
    UnsupportedDegreeError,
    ZeroSystemError,
)
from .homotopy import SUCCESS, PathTrace, alh
from .newton import AlhParams, certificate, mu_norm, newton_refine, relative_residual
from .sampling import sample_rho_st

log = logging.getLogger(__name__)

CERTIFIED_RESIDUAL = 1e-8
DUPLICATE_TOL = 1e-6
REAL_TOL = 1e-6
# Phase applied to the start system of solve_all when the target is real, so the
# segment leaves the real subspace (where the discriminant has real codimension 1).
GAMMA = cmath.exp(1j * 0.5 * (1.0 + math.sqrt(5.0)))

RngLike = Union[np.random.Generator, int, None]


class PathCrossingWarning(UserWarning):
    """Two homotopy paths ended at the same zero."""


@dataclass
class SolveResult:
    zero: Optional[np.ndarray]
    iterations: int
    residual: float
    certified: bool
    mu_final: float
    seed: Optional[int] = None
    trace: Optional[PathTrace] = field(default=None, repr=False)
    approximate_zero: Optional[np.ndarray] = None
    outcome: str = SUCCESS
    path: Optional[int] = None
    duplicate_of: Optional[int] = None

    @property
    def ok(self) -> bool:
        return self.outcome == SUCCESS and self.duplicate_of is None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "schema": 1,
            "outcome": self.outcome,
            "iterations": self.iterations,
            "residual": self.residual,
            "certified": self.certified,
            "mu_final": self.mu_final,
            "zero": None if self.zero is None else point_to_list(self.zero),
        }
        if self.approximate_zero is not None:
            out["approximate_zero"] = point_to_list(self.approximate_zero)
        if self.seed is not None:
            out["seed"] = self.seed
        if self.path is not None:
            out["path"] = self.path
        if self.duplicate_of is not None:
            out["duplicate_of"] = self.duplicate_of
        return out


def _as_rng(rng: RngLike) -> tuple[np.random.Generator, Optional[int]]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        raise PreconditionError("an explicit seed or Generator is required")
    return np.random.default_rng(int(rng)), int(rng)


def _check_input(f: PolySystem) -> None:
    if f.pattern.D < 2:
        raise UnsupportedDegreeError("patterns with D = 1 are linear systems and not supported")
    if f.norm == 0.0:
        raise ZeroSystemError("input system is zero")


def _finish(f: PolySystem, x: np.ndarray, trace: PathTrace, params: AlhParams) -> SolveResult:
    try:
        z = newton_refine(f, x, params.newton_refine_steps)
    except SingularJacobianError:
        log.warning("refinement hit a singular Jacobian; result left uncertified")
        return SolveResult(x, trace.k, relative_residual(f, x), False, math.inf,
                           trace=trace, approximate_zero=x)
    res = relative_residual(f, z)
    cert = certificate(f, x, z, params.u0)
    mu = mu_norm(f, z)
    ok = cert.certified and res <= CERTIFIED_RESIDUAL
    return SolveResult(z, trace.k, res, ok, mu, trace=trace, approximate_zero=x)


def lv_solve(f: PolySystem, rng: RngLike, params: AlhParams = AlhParams()) -> SolveResult:
    """Las Vegas solver: random start pair from the solution variety, then ALH."""
    _check_input(f)
    gen, seed = _as_rng(rng)
    g, zeta = sample_rho_st(f.pattern, gen)
    try:
        x, trace = alh(f, g, zeta, params)
    except (NonConvergenceError, SingularJacobianError) as exc:
        exc.start = (g, zeta)
        raise
    out = _finish(f, x, trace, params)
    out.seed = seed
    return out


def build_U(pattern: DegreePattern) -> tuple[PolySystem, list[np.ndarray]]:
    """The start system U_i = (X_0^{d_i} - X_i^{d_i}) / sqrt(2n) and all its zeros.

    Zeros are unit vectors proportional to (1, w_1^{j_1}, ..., w_n^{j_n}) with
    w_i = exp(2 pi i / d_i), listed with j = (0, ..., 0) first.
    """
    n = pattern.n
    c = 1.0 / math.sqrt(2 * n)
    blocks = []
    for i, d in enumerate(pattern.degrees):
        table = monomials(n, d)
        b = np.zeros(len(table), dtype=complex)
        x0 = [0] * (n + 1)
        x0[0] = d
        xi = [0] * (n + 1)
        xi[i + 1] = d
        b[table.index[tuple(x0)]] = c
        b[table.index[tuple(xi)]] = -c
        blocks.append(b)
    U = PolySystem(pattern, blocks)
    zeros = []
    for js in itertools.product(*(range(d) for d in pattern.degrees)):
        z = np.array([1.0] + [cmath.exp(2j * math.pi * j / d) for j, d in zip(js, pattern.degrees)])
        zeros.append(z / math.sqrt(n + 1))
    return U, zeros


def md_solve(f: PolySystem, params: AlhParams = AlhParams()) -> SolveResult:
    """Deterministic solver: ALH from the fixed pair (U, z_1)."""
    _check_input(f)
    U, zeros = build_U(f.pattern)
    x, trace = alh(f, U, zeros[0], params)
    return _finish(f, x, trace, params)


def _track_one(job, f: PolySystem, start: PolySystem, params: AlhParams) -> SolveResult:
    j, z = job
    try:
        x, trace = alh(f, start, z, params)
    except NonConvergenceError as exc:
        return SolveResult(None, exc.trace.k, math.nan, False, math.nan,
                           trace=exc.trace, outcome=exc.trace.outcome, path=j)
    except SingularJacobianError as exc:
        k = exc.trace.k if exc.trace is not None else 0
        return SolveResult(None, k, math.nan, False, math.nan,
                           trace=exc.trace, outcome="singular", path=j)
    out = _finish(f, x, trace, params)
    out.path = j
    return out


def solve_all(
    f: PolySystem,
    params: AlhParams = AlhParams(),
    *,
    gamma: Optional[complex] = None,
    threads: Optional[int] = 1,
) -> list[SolveResult]:
    """Track every zero of the start system U to the target f.

    Returns one SolveResult per start zero, ordered by start index.  Failed
    paths keep their outcome and have ``zero=None``; endpoints that coincide
    with an earlier one (d_P < 1e-6) are marked through ``duplicate_of`` and a
    PathCrossingWarning is issued.

    ``gamma`` multiplies the start system (its zeros do not change).  By
    default it is 1 for complex input and the fixed phase GAMMA for real
    input, whose straight segment to U would otherwise stay real.
    """
    _check_input(f)
    U, zeros = build_U(f.pattern)
    if gamma is None:
        gamma = GAMMA if f.is_real() else 1.0
    start = U * gamma
    results = pmap(partial(_track_one, f=f, start=start, params=params),
                   list(enumerate(zeros)), threads)
    kept: list[SolveResult] = []
    for r in results:
        if r.zero is None or r.outcome != SUCCESS:
            continue
        for other in kept:
            if proj_distance(r.zero, other.zero) < DUPLICATE_TOL:
                r.duplicate_of = other.path
                warnings.warn(f"paths {other.path} and {r.path} reached the same zero",
                              PathCrossingWarning, stacklevel=2)
                break
        else:
            kept.append(r)
    return results


def distinct_zeros(results: Sequence[SolveResult]) -> list[np.ndarray]:
    return [r.zero for r in results if r.ok]


def _is_real_point(z: np.ndarray, tol: float = REAL_TOL) -> bool:
    k = int(np.argmax(np.abs(z)))
    w = z * np.conj(z[k]) / abs(z[k])
    return float(np.linalg.norm(w.imag)) <= tol


def count_real_zeros(f: PolySystem, params: AlhParams = AlhParams(), *, threads: Optional[int] = 1) -> int:
    """Number of zeros of a real system in real projective space."""
    if not f.is_real():
        raise PreconditionError("count_real_zeros needs real coefficients")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PathCrossingWarning)
        results = solve_all(f, params, threads=threads)
    zeros = distinct_zeros(results)
    if len(zeros) != f.pattern.bezout:
        raise UnreliableCountError(
            f"found {len(zeros)} distinct zeros, expected {f.pattern.bezout}"
        )
    real = [_is_real_point(z) for z in zeros]
    # non-real zeros of a real system come in conjugate pairs
    for z, is_real in zip(zeros, real):
        if is_real:
            continue
        zc = np.conj(z)
        if not any(proj_distance(zc, w) < DUPLICATE_TOL for w in zeros):
            raise UnreliableCountError("a non-real zero has no conjugate partner")
    return int(sum(real))


def solve_result_with_system(f: PolySystem, result: SolveResult) -> dict[str, Any]:
    out = result.to_dict()
    out["system"] = system_to_dict(f)
    return out

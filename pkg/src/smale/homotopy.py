"""Adaptive linear homotopy (ALH) path following."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from . import _kernels
from .algebra import PolySystem, inner_product, sphere_distance
from .errors import (
    DegeneratePencilError,
    NonConvergenceError,
    PreconditionError,
    SingularJacobianError,
)
from .newton import AlhParams, newton_refine, relative_residual

# Pencils with alpha closer than this to 0 or pi are treated as degenerate.
ALPHA_TOL = 1e-8
START_RESIDUAL_TOL = 1e-10

SUCCESS = "success"
MAX_ITERS = "max-iters-exceeded"
SINGULAR = "singular"


@dataclass
class PathTrace:
    """Per-step record of one ALH run.

    ``dtau[i]`` is the value of the step-size rule at step ``i`` (before tau is
    clipped at 1) and ``mu[i]`` the condition number it was computed from.
    """

    tau: np.ndarray
    t: np.ndarray
    mu: np.ndarray
    dtau: np.ndarray
    outcome: str
    alpha: float
    D: int
    lam: float
    meta: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return int(self.tau.shape[0])

    def step_budget_sum(self) -> float:
        """Sum over steps of dtau * alpha * D^{3/2} * mu^2 (equals lam * k by construction)."""
        return float(np.sum(self.dtau * self.alpha * self.D ** 1.5 * self.mu ** 2))

    def records(self) -> Iterator[dict]:
        for i in range(self.k):
            yield {
                "step": i + 1,
                "tau": float(self.tau[i]),
                "t": float(self.t[i]),
                "mu": float(self.mu[i]),
                "dtau": float(self.dtau[i]),
            }

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            header = {"outcome": self.outcome, "k": self.k, "alpha": self.alpha,
                      "D": self.D, "lam": self.lam, **self.meta}
            fh.write(json.dumps(header) + "\n")
            for rec in self.records():
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def empty(cls, outcome: str, alpha: float, D: int, lam: float) -> "PathTrace":
        z = np.zeros(0)
        return cls(z, z.copy(), z.copy(), z.copy(), outcome, alpha, D, lam)


def t_of_tau(tau: float, alpha: float, r: float, s: float) -> float:
    """Linear-segment parameter t whose point t*f + (1-t)*g sits at angle tau*alpha from g.

    ``r`` and ``s`` are the norms of the endpoints f and g.
    """
    if not (0.0 < alpha < math.pi):
        raise DegeneratePencilError(f"alpha = {alpha} is outside (0, pi)")
    if tau == 0.0:
        return 0.0
    return float(_kernels.t_of_tau(float(tau), float(alpha), float(r), float(s)))


def alh(
    f: PolySystem,
    g: PolySystem,
    zeta: np.ndarray,
    params: AlhParams = AlhParams(),
) -> tuple[np.ndarray, PathTrace]:
    """Follow the zero ``zeta`` of ``g`` along the segment from ``g`` to ``f``.

    Returns the final iterate (an approximate zero of ``f``) and the step trace.
    Raises NonConvergenceError when ``params.max_iters`` is reached and
    SingularJacobianError when the Newton operator breaks down; both carry the
    partial trace.
    """
    f._check(g)
    pat = f.pattern
    zeta = np.ascontiguousarray(zeta, dtype=complex)
    zeta = zeta / np.linalg.norm(zeta)
    if relative_residual(g, zeta) > START_RESIDUAL_TOL:
        raise PreconditionError("zeta is not a zero of g")

    alpha = sphere_distance(f, g)
    D = pat.D
    if alpha >= math.pi - ALPHA_TOL:
        raise DegeneratePencilError("f and g are antiparallel")
    if alpha <= ALPHA_TOL:
        x = newton_refine(f, zeta, params.newton_refine_steps)
        return x, PathTrace.empty(SUCCESS, alpha, D, params.lam)

    E, blk, _ = pat._flat
    x, k, status, taus, ts, mus, dtaus = _kernels.alh_loop(
        f.monomial_vector, g.monomial_vector, E, blk, pat.n, D, pat.inv_sqrt_degrees,
        zeta, alpha, f.norm, g.norm, inner_product(f, g).real,
        params.lam, params.max_iters, params.frobenius,
    )
    outcome = {_kernels.STATUS_OK: SUCCESS,
               _kernels.STATUS_MAX_ITERS: MAX_ITERS,
               _kernels.STATUS_SINGULAR: SINGULAR}[status]
    trace = PathTrace(taus, ts, mus, dtaus, outcome, alpha, D, params.lam)
    if outcome == MAX_ITERS:
        raise NonConvergenceError(f"no convergence after {k} steps", trace=trace)
    if outcome == SINGULAR:
        raise SingularJacobianError(f"singular Jacobian at step {k + 1}", trace=trace)
    return x, trace

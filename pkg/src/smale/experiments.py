"""Seeded Monte Carlo estimates of iteration counts, condition numbers and real-zero counts.

Trial ``i`` of an experiment with master seed ``s`` draws all its randomness
from ``SeedSequence(s, spawn_key=(i,))``.  Trials run independently (possibly
in worker processes) and are reduced in index order, so the estimate does not
depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from ._parallel import pmap
from .algebra import DegreePattern, PolySystem, system_to_dict
from .errors import (
    NonConvergenceError,
    PreconditionError,
    SingularJacobianError,
    UnreliableCountError,
    UnsupportedDegreeError,
)
from .newton import AlhParams, mu2_and_max
from .sampling import (
    GaussianSpec,
    _build_g_unchecked,
    complex_normal,
    decompose,
    sample_gaussian,
    sample_real_gaussian,
)
from .solvers import PathCrossingWarning, build_U, count_real_zeros, distinct_zeros, lv_solve, md_solve, solve_all

KINDS = ("avg_k", "smoothed_k", "mu2_expectation", "condition_based_k", "md_avg_k", "real_zero_mean")

# Fraction of failed trials above which a result is flagged.
FLAG_FRACTION = {"avg_k": 0.01, "smoothed_k": 0.01, "condition_based_k": 0.01,
                 "md_avg_k": 0.01, "mu2_expectation": 0.05, "real_zero_mean": 0.05}
EQUALITY_SIGMAS = 3.0

_PATH_FAILURES = (NonConvergenceError, SingularJacobianError)


@dataclass
class ExperimentResult:
    kind: str
    pattern: DegreePattern
    trials: int
    estimate: float
    stderr: float
    bound: Optional[float]
    passed: bool
    seed: int
    wall_time: float
    n_failed: int = 0
    flagged: bool = False
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def n_used(self) -> int:
        return self.trials - self.n_failed

    @property
    def relation(self) -> str:
        return "==" if self.kind == "real_zero_mean" else "<"

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": 1,
            "kind": self.kind,
            "n": self.pattern.n,
            "degrees": list(self.pattern.degrees),
            "trials": self.trials,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "bound": self.bound,
            "relation": self.relation,
            "passed": self.passed,
            "seed": self.seed,
            "wall_time": self.wall_time,
            "n_failed": self.n_failed,
            "flagged": self.flagged,
            "params": self.params,
        }


def trial_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))


def _check_pattern(pattern: DegreePattern) -> None:
    if pattern.D < 2:
        raise UnsupportedDegreeError("patterns with D = 1 are not supported")


def _check_trials(trials: int, minimum: int) -> None:
    if trials < minimum:
        raise PreconditionError(f"need at least {minimum} trials, got {trials}")


def _summarize(values: Sequence[Optional[float]]) -> tuple[float, float, int]:
    used = np.array([v for v in values if v is not None], dtype=float)
    failed = len(values) - used.size
    if used.size < 2:
        return math.nan, math.nan, failed
    return float(used.mean()), float(used.std(ddof=1) / math.sqrt(used.size)), failed


def _run(
    kind: str,
    pattern: DegreePattern,
    trial: Callable[[int], Optional[float]],
    trials: int,
    seed: int,
    bound: float,
    threads: Optional[int],
    params: dict[str, Any],
) -> ExperimentResult:
    start = time.perf_counter()
    values = pmap(trial, range(trials), threads)
    estimate, stderr, failed = _summarize(values)
    if kind == "real_zero_mean":
        passed = abs(estimate - bound) <= EQUALITY_SIGMAS * stderr
    else:
        passed = estimate < bound
    return ExperimentResult(
        kind=kind,
        pattern=pattern,
        trials=trials,
        estimate=estimate,
        stderr=stderr,
        bound=bound,
        passed=bool(passed),
        seed=seed,
        wall_time=time.perf_counter() - start,
        n_failed=failed,
        flagged=failed > FLAG_FRACTION[kind] * trials,
        params=params,
    )


# -- per-trial bodies (module level so they pickle) ---------------------------

def _lv_iterations(f: PolySystem, rng: np.random.Generator, alh: AlhParams) -> Optional[float]:
    try:
        return float(lv_solve(f, rng, alh).iterations)
    except _PATH_FAILURES:
        return None


def _avg_k_trial(i: int, pattern: DegreePattern, seed: int, alh: AlhParams) -> Optional[float]:
    rng = trial_rng(seed, i)
    f = sample_gaussian(GaussianSpec.standard(pattern), rng)
    return _lv_iterations(f, rng, alh)


def _smoothed_trial(i: int, spec: GaussianSpec, seed: int, alh: AlhParams) -> Optional[float]:
    rng = trial_rng(seed, i)
    return _lv_iterations(sample_gaussian(spec, rng), rng, alh)


def _fixed_trial(i: int, f: PolySystem, seed: int, alh: AlhParams) -> Optional[float]:
    return _lv_iterations(f, trial_rng(seed, i), alh)


def _md_trial(i: int, pattern: DegreePattern, seed: int, alh: AlhParams) -> Optional[float]:
    f = sample_gaussian(GaussianSpec.standard(pattern), trial_rng(seed, i))
    try:
        return float(md_solve(f, alh).iterations)
    except _PATH_FAILURES:
        return None


def all_zeros(f: PolySystem, alh: AlhParams = AlhParams(), threads: Optional[int] = 1) -> Optional[list[np.ndarray]]:
    """All zeros of f via solve_all, or None unless every path gave a distinct zero."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PathCrossingWarning)
        zeros = distinct_zeros(solve_all(f, alh, threads=threads))
    return zeros if len(zeros) == f.pattern.bezout else None


def _mu2_trial(i: int, spec: GaussianSpec, seed: int, alh: AlhParams) -> Optional[float]:
    q = sample_gaussian(spec, trial_rng(seed, i))
    zeros = all_zeros(q, alh)
    if zeros is None:
        return None
    mu2 = mu2_and_max(q, zeros).mu2
    if not math.isfinite(mu2):
        return None
    return mu2 ** 2 / q.norm ** 2


def _real_zero_trial(i: int, pattern: DegreePattern, seed: int, alh: AlhParams) -> Optional[float]:
    f = sample_real_gaussian(pattern, trial_rng(seed, i))
    try:
        return float(count_real_zeros(f, alh))
    except UnreliableCountError:
        return None


# -- bounds --------------------------------------------------------------------

def avg_k_bound(pattern: DegreePattern) -> float:
    return 3707 * pattern.D ** 1.5 * pattern.N * (pattern.n + 1)


def smoothed_k_bound(pattern: DegreePattern, sigma: float) -> float:
    N = pattern.N
    return 3707 * pattern.D ** 1.5 * (N + math.sqrt(N / 2)) * (pattern.n + 1) / sigma


def mu2_bound(pattern: DegreePattern, sigma: float) -> float:
    return math.e * (pattern.n + 1) / (2 * sigma ** 2)


def condition_based_bound(pattern: DegreePattern, mu_max: float) -> float:
    return 157109 * pattern.D ** 3 * pattern.N * (pattern.n + 1) * mu_max ** 2


def md_bound(pattern: DegreePattern) -> float:
    return 314217 * pattern.D ** 3 * pattern.N * (pattern.n + 1) ** (pattern.D + 1)


# -- experiments ---------------------------------------------------------------

def avg_k(pattern: DegreePattern, trials: int, seed: int, *, alh: AlhParams = AlhParams(),
          threads: Optional[int] = None) -> ExperimentResult:
    """Mean LV iteration count for standard Gaussian input."""
    _check_pattern(pattern)
    _check_trials(trials, 30)
    return _run("avg_k", pattern, partial(_avg_k_trial, pattern=pattern, seed=seed, alh=alh),
                trials, seed, avg_k_bound(pattern), threads, {})


def smoothed_k(center: PolySystem, sigma: float, trials: int, seed: int, *, alh: AlhParams = AlhParams(),
               threads: Optional[int] = None) -> ExperimentResult:
    """Mean LV iteration count for input from the truncated Gaussian around ``center``."""
    pattern = center.pattern
    _check_pattern(pattern)
    _check_trials(trials, 30)
    if abs(center.norm - 1.0) > 1e-10:
        raise PreconditionError("center must have unit norm")
    if not 0.0 < sigma <= 1.0:
        raise PreconditionError(f"sigma must lie in (0, 1], got {sigma}")
    spec = GaussianSpec.smoothed(center, sigma)
    return _run("smoothed_k", pattern, partial(_smoothed_trial, spec=spec, seed=seed, alh=alh),
                trials, seed, smoothed_k_bound(pattern, sigma), threads,
                {"sigma": sigma, "center": system_to_dict(center)})


def mu2_expectation(center: PolySystem, sigma: float, trials: int, seed: int, *,
                    alh: AlhParams = AlhParams(), threads: Optional[int] = None) -> ExperimentResult:
    """Mean of mu_2(q)^2 / ||q||^2 for q ~ N(center, sigma^2 I)."""
    pattern = center.pattern
    _check_pattern(pattern)
    _check_trials(trials, 100)
    spec = GaussianSpec(center, sigma)
    return _run("mu2_expectation", pattern, partial(_mu2_trial, spec=spec, seed=seed, alh=alh),
                trials, seed, mu2_bound(pattern, sigma), threads,
                {"sigma": sigma, "center": system_to_dict(center)})


def condition_based_k(f: PolySystem, trials: int, seed: int, *, alh: AlhParams = AlhParams(),
                      threads: Optional[int] = None) -> ExperimentResult:
    """Mean LV iteration count on a fixed input, against the bound driven by mu_max(f)."""
    pattern = f.pattern
    _check_pattern(pattern)
    _check_trials(trials, 2)
    if abs(f.norm - 1.0) > 1e-10:
        raise PreconditionError("input must have unit norm")
    zeros = all_zeros(f, alh, threads)
    if zeros is None:
        raise PreconditionError("could not compute all zeros of the input (is it in the discriminant?)")
    mu_max = mu2_and_max(f, zeros).mu_max
    return _run("condition_based_k", pattern, partial(_fixed_trial, f=f, seed=seed, alh=alh),
                trials, seed, condition_based_bound(pattern, mu_max), threads,
                {"mu_max": mu_max, "input": system_to_dict(f)})


def md_avg_k(pattern: DegreePattern, trials: int, seed: int, *, alh: AlhParams = AlhParams(),
             threads: Optional[int] = None) -> ExperimentResult:
    """Mean MD iteration count for standard Gaussian input."""
    _check_pattern(pattern)
    _check_trials(trials, 30)
    return _run("md_avg_k", pattern, partial(_md_trial, pattern=pattern, seed=seed, alh=alh),
                trials, seed, md_bound(pattern), threads, {})


def real_zero_mean(pattern: DegreePattern, trials: int, seed: int, *, alh: AlhParams = AlhParams(),
                   threads: Optional[int] = None) -> ExperimentResult:
    """Mean number of real projective zeros of a real standard Gaussian system; target sqrt(bezout)."""
    _check_pattern(pattern)
    _check_trials(trials, 500)
    return _run("real_zero_mean", pattern, partial(_real_zero_trial, pattern=pattern, seed=seed, alh=alh),
                trials, seed, math.sqrt(pattern.bezout), threads, {})


def near_discriminant_system(pattern: DegreePattern, rng: np.random.Generator,
                             fraction: float = 0.99) -> PolySystem:
    """A unit-norm system a fraction of the way from a Gaussian system to a singular one.

    The singular endpoint has a zero at which its derivative restricted to the
    tangent space has rank n - 1.
    """
    n = pattern.n
    zeta = complex_normal(rng, n + 1)
    zeta /= np.linalg.norm(zeta)
    # rank n - 1 matrix vanishing on zeta
    M = complex_normal(rng, (n, n + 1))
    M = M - np.outer(M @ zeta, np.conj(zeta))
    u, s, vh = np.linalg.svd(M)
    s[n - 1] = 0.0
    M = (u * s) @ vh[:n]
    h = decompose(sample_gaussian(GaussianSpec.standard(pattern), rng), zeta).h
    singular = (_build_g_unchecked(M, zeta, pattern) + h).normalized()
    f0 = sample_gaussian(GaussianSpec.standard(pattern), rng).normalized()
    return (f0 * (1.0 - fraction) + singular * fraction).normalized()


# -- ledger and reports --------------------------------------------------------

def append_ledger(path: str | Path, result: ExperimentResult) -> None:
    with open(path, "a") as fh:
        fh.write(json.dumps(result.to_dict()) + "\n")


def read_ledger(path: str | Path) -> list[dict[str, Any]]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


_COLUMNS = ("kind", "degrees", "trials", "estimate", "stderr", "relation", "bound", "passed", "n_failed", "seed")


def _row(rec: dict[str, Any]) -> list[str]:
    out = []
    for col in _COLUMNS:
        v = rec.get(col)
        if col == "degrees":
            v = ",".join(map(str, v))
        elif isinstance(v, float):
            v = f"{v:.6g}"
        out.append(str(v))
    return out


def render_report(records: Iterable[dict[str, Any]], fmt: str = "text") -> str:
    rows = [_row(r) for r in records]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(_COLUMNS)
        w.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    widths = [max(len(c), *(len(r[j]) for r in rows)) if rows else len(c) for j, c in enumerate(_COLUMNS)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(_COLUMNS, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def run_experiment(kind: str, pattern: DegreePattern, trials: int, seed: int, *,
                   sigma: float = 1.0, center: Optional[PolySystem] = None,
                   alh: AlhParams = AlhParams(), threads: Optional[int] = None) -> ExperimentResult:
    """Dispatch by kind name; ``center`` defaults to the start system U (or 0 for mu2_expectation)."""
    kind = kind.replace("-", "_")
    if kind == "avg_k":
        return avg_k(pattern, trials, seed, alh=alh, threads=threads)
    if kind == "md_avg_k":
        return md_avg_k(pattern, trials, seed, alh=alh, threads=threads)
    if kind == "real_zero_mean":
        return real_zero_mean(pattern, trials, seed, alh=alh, threads=threads)
    if kind == "mu2_expectation":
        c = center if center is not None else PolySystem.zeros(pattern)
        return mu2_expectation(c, sigma, trials, seed, alh=alh, threads=threads)
    c = center if center is not None else build_U(pattern)[0]
    if kind == "smoothed_k":
        return smoothed_k(c, sigma, trials, seed, alh=alh, threads=threads)
    if kind == "condition_based_k":
        return condition_based_k(c, trials, seed, alh=alh, threads=threads)
    raise ValueError(f"unknown experiment kind {kind!r}; choose from {', '.join(KINDS)}")

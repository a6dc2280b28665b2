from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from smale.algebra import DegreePattern, PolySystem
from smale.sampling import complex_normal

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_system(pattern: DegreePattern, rng: np.random.Generator, real: bool = False) -> PolySystem:
    if real:
        return PolySystem.from_vector(pattern, rng.standard_normal(pattern.N).astype(complex))
    return PolySystem.from_vector(pattern, complex_normal(rng, pattern.N))


def random_point(n: int, rng: np.random.Generator) -> np.ndarray:
    x = complex_normal(rng, n + 1)
    return x / np.linalg.norm(x)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def stability_instance(pattern: DegreePattern, rng: np.random.Generator, C: float = 0.025):
    """Random (f, zeta) with f(zeta) = 0 plus perturbations (g, x) inside the stability radii.

    Returns (mu_norm(f, zeta), mu_norm(g, x)).
    """
    from smale.newton import mu_norm
    from smale.sampling import sample_rho_st

    f, zeta = sample_rho_st(pattern, rng)
    f = f.normalized()
    mu_f = mu_norm(f, zeta)
    h = PolySystem.from_vector(pattern, complex_normal(rng, pattern.N))
    h = h - f * np.vdot(f.vector, h.vector).real
    h = h.normalized()
    delta = rng.uniform(0, 1) * C / (math.sqrt(pattern.D) * mu_f)
    g = f * math.cos(delta) + h * math.sin(delta)
    mu_g_zeta = mu_norm(g, zeta)
    v = complex_normal(rng, pattern.n + 1)
    v = v - zeta * np.vdot(zeta, v)
    v /= np.linalg.norm(v)
    eta = rng.uniform(0, 1) * C / (pattern.D ** 1.5 * mu_g_zeta)
    x = math.cos(eta) * zeta + math.sin(eta) * v
    return mu_f, mu_norm(g, x)

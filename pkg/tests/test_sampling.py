from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_point, random_system
from smale.algebra import (
    DegreePattern,
    PolySystem,
    evaluate,
    evaluate_with_jacobian,
    inner_product,
    mul_linear,
)
from smale.errors import PreconditionError
from smale.sampling import (
    GaussianSpec,
    build_g,
    complex_normal,
    decompose,
    sample_gaussian,
    sample_real_gaussian,
    sample_rho_st,
)
from smale.solvers import build_U

P22 = DegreePattern.of((2, 2))
seeds = st.integers(0, 2**32 - 1)
small_patterns = st.sampled_from([(2,), (3,), (2, 2), (2, 3), (3, 3), (2, 2, 2), (4, 2)]).map(DegreePattern.of)


def kernel_matrix(rows, zeta, rng):
    """Gaussian matrix whose rows vanish at zeta."""
    M = complex_normal(rng, (rows, zeta.size))
    return M - np.outer(M @ zeta, np.conj(zeta))


def test_gaussian_spec_validation():
    with pytest.raises(PreconditionError):
        GaussianSpec(PolySystem.zeros(P22), 0.0)
    with pytest.raises(PreconditionError):
        GaussianSpec(PolySystem.zeros(P22), 1.0, truncation=-1.0)
    spec = GaussianSpec.smoothed(build_U(P22)[0], 0.5)
    assert spec.truncation == pytest.approx(math.sqrt(24))


def test_tiny_sigma_returns_mean(rng):
    mean = random_system(P22, rng)
    f = sample_gaussian(GaussianSpec(mean, 1e-30), rng)
    np.testing.assert_allclose(f.vector, mean.vector, rtol=0, atol=1e-28)


def test_standard_gaussian_norm_is_chi_square(rng):
    draws = np.array([sample_gaussian(GaussianSpec.standard(P22), rng).norm ** 2 for _ in range(5000)])
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - 2 * P22.N) <= 3 * se


def test_truncated_acceptance_rate(rng):
    A = math.sqrt(2 * P22.N)
    accepted = sum(np.linalg.norm(complex_normal(rng, P22.N)) <= A for _ in range(5000))
    assert accepted / 5000 >= 0.5
    spec = GaussianSpec.smoothed(build_U(P22)[0], 1.0)
    for _ in range(50):
        f = sample_gaussian(spec, rng)
        assert (f - spec.mean).norm <= A


def test_real_gaussian_is_real(rng):
    f = sample_real_gaussian(P22, rng)
    assert f.is_real()


def test_build_g_examples():
    p = DegreePattern.of((2,))
    g = build_g(np.array([[0, 1]]), np.array([1, 0]), p)
    # sqrt(2) X0 X1 has BW coordinate 1 on X0 X1
    np.testing.assert_allclose(g.vector, [0, 1, 0], atol=1e-15)
    assert g.norm == pytest.approx(1.0)
    zero = build_g(np.zeros((2, 3)), np.array([1, 0, 0]), P22)
    assert zero.norm == 0.0
    with pytest.raises(PreconditionError):
        build_g(np.ones((2, 3)), np.array([1, 0, 0]), P22)


@given(small_patterns, seeds)
def test_build_g_properties(pattern, seed):
    rng = np.random.default_rng(seed)
    zeta = random_point(pattern.n, rng)
    M = kernel_matrix(pattern.n, zeta, rng)
    g = build_g(M, zeta, pattern)
    assert g.norm == pytest.approx(np.linalg.norm(M), rel=1e-10)
    vals, jac = evaluate_with_jacobian(g, zeta)
    assert np.linalg.norm(vals) <= 1e-12 * g.norm
    delta = np.sqrt(np.array(pattern.degrees, dtype=float))
    np.testing.assert_allclose(jac, delta[:, None] * M, atol=1e-9 * g.norm)
    t = decompose(g, zeta)
    assert t.k.norm <= 1e-9 * g.norm and t.h.norm <= 1e-9 * g.norm
    np.testing.assert_allclose(t.M, M, atol=1e-9 * g.norm)


@given(small_patterns, seeds)
def test_decomposition_is_orthogonal(pattern, seed):
    rng = np.random.default_rng(seed)
    f = random_system(pattern, rng)
    zeta = random_point(pattern.n, rng)
    t = decompose(f, zeta)
    g = build_g(t.M, zeta, pattern)
    parts = [t.k, g, t.h]
    scale = f.norm ** 2
    assert (t.k + g + t.h - f).norm <= 1e-10 * f.norm
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(inner_product(parts[i], parts[j])) <= 1e-10 * scale
    pyth = t.k.norm ** 2 + np.linalg.norm(t.M) ** 2 + t.h.norm ** 2
    assert pyth == pytest.approx(scale, rel=1e-10)
    # h vanishes to second order at zeta
    vals, jac = evaluate_with_jacobian(t.h, zeta)
    assert np.linalg.norm(vals) <= 1e-10 * f.norm and np.linalg.norm(jac) <= 1e-10 * f.norm


def test_decompose_system_in_R_zeta(rng):
    p = DegreePattern.of((2, 2))
    zeta = random_point(2, rng)
    # product of two linear forms vanishing at zeta, per block
    blocks = []
    for _ in range(2):
        a, b = kernel_matrix(2, zeta, rng)
        blocks.append(mul_linear(a, 2, 1, b))
    f = PolySystem.from_monomial_blocks(p, blocks)
    t = decompose(f, zeta)
    assert t.k.norm <= 1e-12 * f.norm
    assert np.linalg.norm(t.M) <= 1e-12 * f.norm
    assert (t.h - f).norm <= 1e-12 * f.norm


def test_decompose_start_system_at_z1():
    U, zeros = build_U(P22)
    z1 = zeros[0]
    t = decompose(U, z1)
    assert t.k.norm <= 1e-15
    _, jac = evaluate_with_jacobian(U, z1)
    expected = (jac @ (np.eye(3) - np.outer(z1, z1.conj()))) / np.sqrt(2.0)
    np.testing.assert_allclose(t.M, expected, atol=1e-15)
    assert (t.k + build_g(t.M, z1, P22) + t.h - U).norm <= 1e-14


@given(small_patterns, seeds)
def test_rho_st_draws_are_zeros(pattern, seed):
    g, zeta = sample_rho_st(pattern, np.random.default_rng(seed))
    assert np.linalg.norm(zeta) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(evaluate(g, zeta)) <= 1e-10 * g.norm


def test_rho_st_marginal_moments(rng):
    draws = [sample_rho_st(P22, rng)[0].vector for _ in range(5000)]
    V = np.array(draws)
    sq = np.sum(np.abs(V) ** 2, axis=1)
    se = sq.std(ddof=1) / math.sqrt(sq.size)
    assert abs(sq.mean() - 2 * P22.N) <= 3 * se
    for part in (V.real, V.imag):
        m = part.mean(axis=0)
        s = part.std(axis=0, ddof=1) / math.sqrt(part.shape[0])
        assert np.all(np.abs(m) <= 4 * s)


def test_rho_st_disjoint_seeds_agree():
    means = []
    for seed in (1, 2):
        rng = np.random.default_rng(seed)
        sq = np.array([sample_rho_st(P22, rng)[0].norm ** 2 for _ in range(2000)])
        means.append((sq.mean(), sq.var(ddof=1) / sq.size))
    (m1, v1), (m2, v2) = means
    assert abs(m1 - m2) <= 4 * math.sqrt(v1 + v2)

from __future__ import annotations

import itertools
import math
import warnings

import numpy as np
import pytest

from conftest import random_system
from oracles import affine_chart, matching_error, univariate_affine_roots
from smale import solvers
from smale.algebra import DegreePattern, PolySystem, apply_unitary, evaluate, proj_distance
from smale.errors import (
    DegeneratePencilError,
    NonConvergenceError,
    PreconditionError,
    UnreliableCountError,
    UnsupportedDegreeError,
    ZeroSystemError,
)
from smale.newton import AlhParams, mu_norm
from smale.solvers import (
    PathCrossingWarning,
    SolveResult,
    build_U,
    count_real_zeros,
    distinct_zeros,
    lv_solve,
    md_solve,
    solve_all,
)

P22 = DegreePattern.of((2, 2))


def nearest(z, points):
    return min(proj_distance(z, p) for p in points)


def test_build_U_two_quadrics():
    U, zeros = build_U(P22)
    assert U.norm == pytest.approx(1.0, abs=1e-15)
    expected = [np.array([1, a, b]) / math.sqrt(3) for a, b in itertools.product((1, -1), repeat=2)]
    assert len(zeros) == 4
    for e in expected:
        assert nearest(e, zeros) <= 1e-15
    np.testing.assert_allclose(zeros[0], np.ones(3) / math.sqrt(3))


@pytest.mark.parametrize("degrees", [(2,), (3,), (2, 3), (3, 3, 2), (2, 2, 2, 2)])
def test_build_U_zeros(degrees):
    p = DegreePattern.of(degrees)
    U, zeros = build_U(p)
    assert len(zeros) == p.bezout
    mus = [mu_norm(U, z) for z in zeros]
    for z in zeros:
        assert np.linalg.norm(evaluate(U, z)) <= 1e-12
    assert max(mus) - min(mus) <= 1e-9 * max(mus)
    assert min(proj_distance(a, b) for a, b in itertools.combinations(zeros, 2)) > 1e-3


def test_lv_rejects_linear_and_zero_systems():
    lin = DegreePattern.of((1, 1))
    with pytest.raises(UnsupportedDegreeError):
        lv_solve(random_system(lin, np.random.default_rng(0)), 0)
    with pytest.raises(ZeroSystemError):
        lv_solve(PolySystem.zeros(P22), 0)
    with pytest.raises(PreconditionError):
        lv_solve(random_system(P22, np.random.default_rng(0)), None)


def test_lv_seeded_run_is_certified_and_reproducible(rng):
    f = random_system(P22, rng)
    a = lv_solve(f, 42)
    b = lv_solve(f, 42)
    assert a.certified and a.residual <= 1e-10 and a.seed == 42
    assert a.iterations == b.iterations
    np.testing.assert_array_equal(a.zero, b.zero)
    assert a.mu_final == pytest.approx(mu_norm(f, a.zero))
    assert a.to_dict()["schema"] == 1


def test_lv_on_start_system_finds_orbit_point():
    U, zeros = build_U(P22)
    r = lv_solve(U, 3)
    assert r.certified
    assert nearest(r.zero, zeros) <= 1e-6


def test_lv_failure_records_start_pair(rng):
    f = random_system(P22, rng)
    with pytest.raises(NonConvergenceError) as info:
        lv_solve(f, 1, AlhParams(max_iters=5))
    g, zeta = info.value.start
    assert np.linalg.norm(evaluate(g, zeta)) <= 1e-10 * g.norm
    assert info.value.trace.k == 5


def test_md_degenerate_inputs():
    U, zeros = build_U(P22)
    r = md_solve(U)
    assert r.iterations == 0 and r.certified and proj_distance(r.zero, zeros[0]) <= 1e-12
    assert r.seed is None
    with pytest.raises(DegeneratePencilError):
        md_solve(-U)


def test_md_univariate_matches_oracle(rng):
    p = DegreePattern.of((12,))
    f = random_system(p, rng)
    a = md_solve(f)
    b = md_solve(f)
    assert a.iterations == b.iterations
    np.testing.assert_array_equal(a.zero, b.zero)
    assert a.certified
    z = affine_chart([a.zero])[0]
    roots = univariate_affine_roots(f)
    assert np.min(np.abs(roots - z) / np.maximum(1.0, np.abs(roots))) <= 1e-8


def test_md_permutation_equivariance(rng):
    f = random_system(P22, rng)
    nu = np.eye(3)[[0, 2, 1]]
    # f o nu^{-1} with its blocks put back in the order of U's blocks
    g = apply_unitary(f, nu.T)
    g = PolySystem(P22, [g.coeffs[1], g.coeffs[0]])
    a, b = md_solve(f), md_solve(g)
    assert proj_distance(nu @ a.zero, b.zero) <= 1e-6


def test_solve_all_real_quadrics(rng):
    f = random_system(P22, rng, real=True)
    results = solve_all(f)
    assert [r.path for r in results] == [0, 1, 2, 3]
    zeros = distinct_zeros(results)
    assert len(zeros) == 4
    assert all(r.certified and r.residual <= 1e-10 for r in results)
    assert min(proj_distance(a, b) for a, b in itertools.combinations(zeros, 2)) > 1e-6


def test_solve_all_univariate_quintic_matches_oracle(rng):
    f = random_system(DegreePattern.of((5,)), rng)
    zeros = distinct_zeros(solve_all(f))
    assert len(zeros) == 5
    assert matching_error(affine_chart(zeros), univariate_affine_roots(f)) <= 1e-8


def test_solve_all_start_system_is_constant():
    U, zeros = build_U(DegreePattern.of((2, 3)))
    results = solve_all(U)
    # the start system is rotated by a phase for real input, so the paths are
    # constant in projective space without being empty
    for r, z in zip(results, zeros):
        assert proj_distance(r.zero, z) <= 1e-12 and r.certified


def test_solve_all_scale_and_thread_invariance(rng):
    f = random_system(P22, rng)
    a = solve_all(f)
    b = solve_all(f * 3)
    c = solve_all(f, threads=2)
    for ra, rb, rc in zip(a, b, c):
        assert proj_distance(ra.zero, rb.zero) <= 1e-10
        assert ra.iterations == rc.iterations
        np.testing.assert_array_equal(ra.zero, rc.zero)


def test_solve_all_reports_duplicates(monkeypatch):
    x = np.ones(3, dtype=complex) / math.sqrt(3)

    def fake(job, f, start, params):
        return SolveResult(x, 1, 0.0, True, 1.0, path=job[0])

    monkeypatch.setattr(solvers, "_track_one", fake)
    U, _ = build_U(P22)
    with pytest.warns(PathCrossingWarning):
        results = solve_all(U + U * 0.1j)
    assert [r.duplicate_of for r in results] == [None, 0, 0, 0]
    assert len(distinct_zeros(results)) == 1


def test_solve_all_keeps_failed_paths(rng):
    f = random_system(P22, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PathCrossingWarning)
        results = solve_all(f, AlhParams(max_iters=10))
    assert len(results) == 4
    assert all(r.zero is None and r.outcome == "max-iters-exceeded" for r in results)


def test_count_real_zeros_examples(rng):
    U, _ = build_U(P22)
    assert count_real_zeros(U) == 4
    circle = PolySystem.from_monomial_blocks(DegreePattern.of((2,)), [[1, 0, 1]])
    assert count_real_zeros(circle) == 0
    for _ in range(20):
        assert count_real_zeros(random_system(DegreePattern.of((2,)), rng, real=True)) in (0, 2)
    with pytest.raises(PreconditionError):
        count_real_zeros(random_system(P22, rng))


def test_count_real_zeros_flags_failures(rng):
    f = random_system(P22, rng, real=True)
    with pytest.raises(UnreliableCountError):
        count_real_zeros(f, AlhParams(max_iters=10))

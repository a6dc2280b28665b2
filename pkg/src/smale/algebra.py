"""Homogeneous polynomial systems stored in the Bombieri-Weyl basis.

A system ``f = (f_1, ..., f_n)`` in ``n + 1`` variables keeps, for every block
``i``, the coordinates ``a_alpha`` of ``f_i`` with respect to the basis
``sqrt(multinomial(d_i, alpha)) * X**alpha``.  With that choice the Hermitian
inner product of two systems is the plain Euclidean one on the stored vectors
and is invariant under unitary changes of variables.

Multi-indices of a fixed degree are listed in graded-lexicographic order,
``X_0**d`` first.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    DegreeMismatchError,
    NonUnitaryError,
    PatternMismatchError,
    ZeroSystemError,
)

UNITARY_TOL = 1e-12


@dataclass(frozen=True)
class DegreePattern:
    """Shape (n; d_1..d_n) of a system of n polynomials in n+1 variables."""

    n: int
    degrees: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if len(self.degrees) != self.n:
            raise ValueError(f"expected {self.n} degrees, got {len(self.degrees)}")
        if any(d < 1 for d in self.degrees):
            raise ValueError(f"degrees must be >= 1, got {self.degrees}")

    @classmethod
    def of(cls, degrees: Sequence[int]) -> "DegreePattern":
        return cls(len(degrees), tuple(degrees))

    @property
    def D(self) -> int:
        return max(self.degrees)

    @property
    def N(self) -> int:
        """Complex dimension of the space of systems."""
        return sum(math.comb(self.n + d, self.n) for d in self.degrees)

    @property
    def bezout(self) -> int:
        return math.prod(self.degrees)

    def block_size(self, i: int) -> int:
        return math.comb(self.n + self.degrees[i], self.n)

    @cached_property
    def _flat(self):
        exps, blk, weights = [], [], []
        for i, d in enumerate(self.degrees):
            table = monomials(self.n, d)
            exps.append(table.exponents)
            blk.append(np.full(len(table), i, dtype=np.int64))
            weights.append(table.sqrt_multinomial)
        E = np.ascontiguousarray(np.vstack(exps), dtype=np.int64)
        return E, np.concatenate(blk), np.concatenate(weights)

    @cached_property
    def inv_sqrt_degrees(self) -> np.ndarray:
        return 1.0 / np.sqrt(np.asarray(self.degrees, dtype=float))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return tuple(itertools.accumulate((self.block_size(i) for i in range(self.n)), initial=0))


@dataclass(frozen=True)
class MonomialTable:
    n: int
    degree: int
    exponents: np.ndarray
    sqrt_multinomial: np.ndarray
    index: dict[tuple[int, ...], int] = field(repr=False)

    def __len__(self) -> int:
        return self.exponents.shape[0]


def multinomial(alpha: Iterable[int]) -> int:
    alpha = list(alpha)
    out = math.factorial(sum(alpha))
    for a in alpha:
        out //= math.factorial(a)
    return out


@lru_cache(maxsize=None)
def monomials(n: int, d: int) -> MonomialTable:
    """All exponent vectors of degree ``d`` in ``n + 1`` variables, graded-lex order."""
    rows = []
    for combo in itertools.combinations_with_replacement(range(n + 1), d):
        e = [0] * (n + 1)
        for j in combo:
            e[j] += 1
        rows.append(tuple(e))
    exps = np.array(rows, dtype=np.int64).reshape(len(rows), n + 1)
    exps.setflags(write=False)
    w = np.sqrt(np.array([multinomial(r) for r in rows], dtype=float))
    w.setflags(write=False)
    return MonomialTable(n, d, exps, w, {r: k for k, r in enumerate(rows)})


@lru_cache(maxsize=None)
def _raise_map(n: int, d: int) -> np.ndarray:
    """``out[j, k]`` is the index in degree d+1 of (alpha_k + e_j)."""
    src = monomials(n, d)
    dst = monomials(n, d + 1)
    out = np.empty((n + 1, len(src)), dtype=np.int64)
    for k, row in enumerate(src.exponents):
        for j in range(n + 1):
            e = list(row)
            e[j] += 1
            out[j, k] = dst.index[tuple(e)]
    out.setflags(write=False)
    return out


def mul_linear(coeffs: np.ndarray, n: int, d: int, form: np.ndarray) -> np.ndarray:
    """Monomial coefficients of ``p * sum_j form[j] X_j`` for ``p`` of degree ``d``."""
    up = _raise_map(n, d)
    out = np.zeros(len(monomials(n, d + 1)), dtype=complex)
    for j in range(n + 1):
        if form[j] != 0:
            out[up[j]] += form[j] * coeffs
    return out


def linear_power(form: np.ndarray, n: int, d: int) -> np.ndarray:
    """Monomial coefficients of ``(sum_j form[j] X_j) ** d``."""
    c = np.ones(1, dtype=complex)
    for k in range(d):
        c = mul_linear(c, n, k, form)
    return c


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class PolySystem:
    """An immutable system of homogeneous polynomials in BW coordinates."""

    def __init__(self, pattern: DegreePattern, coeffs: Sequence[Any]):
        if len(coeffs) != pattern.n:
            raise PatternMismatchError(f"expected {pattern.n} blocks, got {len(coeffs)}")
        blocks = []
        for i, c in enumerate(coeffs):
            c = np.asarray(c, dtype=complex).ravel()
            if c.shape[0] != pattern.block_size(i):
                raise PatternMismatchError(
                    f"block {i} needs {pattern.block_size(i)} coordinates, got {c.shape[0]}"
                )
            blocks.append(_readonly(c))
        self.pattern = pattern
        self.coeffs = tuple(blocks)

    @classmethod
    def from_vector(cls, pattern: DegreePattern, vec: np.ndarray) -> "PolySystem":
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (pattern.N,):
            raise PatternMismatchError(f"expected vector of length {pattern.N}, got {vec.shape}")
        off = pattern.offsets
        return cls(pattern, [vec[off[i]:off[i + 1]] for i in range(pattern.n)])

    @classmethod
    def zeros(cls, pattern: DegreePattern) -> "PolySystem":
        return cls.from_vector(pattern, np.zeros(pattern.N, dtype=complex))

    @classmethod
    def from_monomial_blocks(cls, pattern: DegreePattern, blocks: Sequence[Any]) -> "PolySystem":
        """Build from monomial-basis coefficient vectors (graded-lex per block)."""
        out = []
        for i, b in enumerate(blocks):
            w = monomials(pattern.n, pattern.degrees[i]).sqrt_multinomial
            out.append(np.asarray(b, dtype=complex) / w)
        return cls(pattern, out)

    @cached_property
    def vector(self) -> np.ndarray:
        v = np.concatenate(self.coeffs)
        v.setflags(write=False)
        return v

    @cached_property
    def monomial_vector(self) -> np.ndarray:
        """Coefficients in the plain monomial basis, flattened over blocks."""
        return np.ascontiguousarray(self.vector * self.pattern._flat[2])

    def monomial_blocks(self) -> list[np.ndarray]:
        off = self.pattern.offsets
        mv = self.monomial_vector
        return [mv[off[i]:off[i + 1]].copy() for i in range(self.pattern.n)]

    @cached_property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.vector.imag) <= tol))

    def _check(self, other: "PolySystem") -> None:
        if not isinstance(other, PolySystem):
            raise TypeError(f"expected PolySystem, got {type(other).__name__}")
        if other.pattern != self.pattern:
            raise PatternMismatchError(f"{self.pattern} vs {other.pattern}")

    def __add__(self, other: "PolySystem") -> "PolySystem":
        self._check(other)
        return PolySystem.from_vector(self.pattern, self.vector + other.vector)

    def __sub__(self, other: "PolySystem") -> "PolySystem":
        self._check(other)
        return PolySystem.from_vector(self.pattern, self.vector - other.vector)

    def __mul__(self, scalar: complex) -> "PolySystem":
        return PolySystem.from_vector(self.pattern, complex(scalar) * self.vector)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "PolySystem":
        return PolySystem.from_vector(self.pattern, self.vector / complex(scalar))

    def __neg__(self) -> "PolySystem":
        return PolySystem.from_vector(self.pattern, -self.vector)

    def normalized(self) -> "PolySystem":
        if self.norm == 0.0:
            raise ZeroSystemError("cannot normalize the zero system")
        return self / self.norm

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return evaluate(self, x)

    def __repr__(self) -> str:
        return f"PolySystem(n={self.pattern.n}, degrees={self.pattern.degrees}, norm={self.norm:.6g})"


# --------------------------------------------------------------------------
# basis conversion


def _check_alpha(pattern: DegreePattern, i: int, alpha: Sequence[int]) -> tuple[int, ...]:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != pattern.n + 1 or any(a < 0 for a in alpha):
        raise DegreeMismatchError(f"multi-index {alpha} is not over {pattern.n + 1} variables")
    if sum(alpha) != pattern.degrees[i]:
        raise DegreeMismatchError(
            f"|alpha| = {sum(alpha)} but block {i} has degree {pattern.degrees[i]}"
        )
    return alpha


def bw_from_monomial(pattern: DegreePattern, i: int, alpha: Sequence[int], c: complex) -> complex:
    """BW coordinate representing the monomial term ``c * X**alpha`` of block ``i``."""
    alpha = _check_alpha(pattern, i, alpha)
    return complex(c) / math.sqrt(multinomial(alpha))


def monomial_from_bw(pattern: DegreePattern, i: int, alpha: Sequence[int], a: complex) -> complex:
    alpha = _check_alpha(pattern, i, alpha)
    return complex(a) * math.sqrt(multinomial(alpha))


# --------------------------------------------------------------------------
# evaluation


def _kernel_args(f: PolySystem):
    E, blk, _ = f.pattern._flat
    return f.monomial_vector, E, blk, f.pattern.n, f.pattern.D


def evaluate(f: PolySystem, x: np.ndarray) -> np.ndarray:
    """(f_1(x), ..., f_n(x))."""
    x = np.ascontiguousarray(x, dtype=complex)
    c, E, blk, n, D = _kernel_args(f)
    return _kernels.evaluate(c, E, blk, n, D, x)


def jacobian(f: PolySystem, x: np.ndarray) -> np.ndarray:
    """The n x (n+1) matrix of partial derivatives at x."""
    x = np.ascontiguousarray(x, dtype=complex)
    c, E, blk, n, D = _kernel_args(f)
    return _kernels.eval_jac(c, E, blk, n, D, x)[1]


def evaluate_with_jacobian(f: PolySystem, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.ascontiguousarray(x, dtype=complex)
    c, E, blk, n, D = _kernel_args(f)
    return _kernels.eval_jac(c, E, blk, n, D, x)


# --------------------------------------------------------------------------
# inner product, unitary action


def inner_product(f: PolySystem, g: PolySystem) -> complex:
    """Bombieri-Weyl Hermitian product, linear in ``f`` and conjugate-linear in ``g``."""
    f._check(g)
    return complex(np.vdot(g.vector, f.vector))


def norm(f: PolySystem) -> float:
    return f.norm


def _substitution_matrix(n: int, d: int, nu: np.ndarray) -> np.ndarray:
    """Matrix T with column alpha = monomial coefficients of prod_j (nu[j] . X)**alpha_j."""
    table = monomials(n, d)
    cols = [np.ones(1, dtype=complex)]
    for k in range(d):
        nxt = monomials(n, k + 1)
        cur = cols
        cols = [None] * len(nxt)
        src = monomials(n, k)
        for a, row in enumerate(nxt.exponents):
            j = int(np.flatnonzero(row)[0])
            parent = list(row)
            parent[j] -= 1
            cols[a] = mul_linear(cur[src.index[tuple(parent)]], n, k, nu[j])
    return np.array(cols, dtype=complex).T.reshape(len(table), len(table))


def apply_unitary(f: PolySystem, nu: np.ndarray) -> PolySystem:
    """The system ``x -> f(nu @ x)``, re-expanded into BW coordinates."""
    nu = np.asarray(nu, dtype=complex)
    m = f.pattern.n + 1
    if nu.shape != (m, m):
        raise NonUnitaryError(f"expected a {m}x{m} matrix, got {nu.shape}")
    if np.max(np.abs(nu.conj().T @ nu - np.eye(m))) > UNITARY_TOL:
        raise NonUnitaryError("matrix is not unitary to 1e-12")
    n = f.pattern.n
    blocks = []
    for i, d in enumerate(f.pattern.degrees):
        w = monomials(n, d).sqrt_multinomial
        T = _substitution_matrix(n, d, nu)
        blocks.append((T @ (w * f.coeffs[i])) / w)
    return PolySystem(f.pattern, blocks)


# --------------------------------------------------------------------------
# metrics on projective space and on the sphere of systems


def normalize_point(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return x / np.linalg.norm(x)


def proj_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Fubini-Study distance, the angle between the lines through x and y."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    x = x / np.linalg.norm(x)
    y = y / np.linalg.norm(y)
    c = np.vdot(x, y)
    # atan2 keeps full relative accuracy for nearby points, where arccos does not
    return float(np.arctan2(np.linalg.norm(y - c * x), abs(c)))


def sphere_distance(f: PolySystem, g: PolySystem) -> float:
    """Angle between f and g in the real Euclidean structure of the coefficient space."""
    f._check(g)
    if f.norm == 0.0 or g.norm == 0.0:
        raise ZeroSystemError("angle undefined for the zero system")
    u = f.vector / f.norm
    v = g.vector / g.norm
    return float(2.0 * np.arctan2(np.linalg.norm(u - v), np.linalg.norm(u + v)))


def tangent_basis(zeta: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the Hermitian complement of zeta."""
    return _kernels.tangent_basis(np.ascontiguousarray(zeta, dtype=complex))


def random_unitary(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrix."""
    z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


# --------------------------------------------------------------------------
# JSON system format


def system_to_dict(f: PolySystem) -> dict[str, Any]:
    n = f.pattern.n
    polys = []
    for i, d in enumerate(f.pattern.degrees):
        table = monomials(n, d)
        polys.append([
            {"alpha": [int(a) for a in row], "re": float(a.real), "im": float(a.imag)}
            for row, a in zip(table.exponents, f.coeffs[i])
            if a != 0
        ])
    return {"schema": 1, "n": n, "degrees": list(f.pattern.degrees), "basis": "bw", "polys": polys}


def system_from_dict(data: dict[str, Any]) -> PolySystem:
    try:
        pattern = DegreePattern(int(data["n"]), tuple(data["degrees"]))
        basis = data.get("basis", "bw")
        polys = data["polys"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed system: {exc}") from exc
    if basis not in ("bw", "monomial"):
        raise ValueError(f"unknown basis {basis!r}")
    if len(polys) != pattern.n:
        raise PatternMismatchError(f"expected {pattern.n} polynomials, got {len(polys)}")
    blocks = []
    for i, terms in enumerate(polys):
        table = monomials(pattern.n, pattern.degrees[i])
        block = np.zeros(len(table), dtype=complex)
        for term in terms:
            alpha = _check_alpha(pattern, i, term["alpha"])
            c = complex(term.get("re", 0.0), term.get("im", 0.0))
            if basis == "monomial":
                c = bw_from_monomial(pattern, i, alpha, c)
            block[table.index[alpha]] += c
        blocks.append(block)
    return PolySystem(pattern, blocks)


def point_to_list(x: np.ndarray) -> list[list[float]]:
    return [[float(v.real), float(v.imag)] for v in np.asarray(x, dtype=complex)]


def point_from_list(data: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in data], dtype=complex)

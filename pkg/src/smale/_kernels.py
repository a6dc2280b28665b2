"""Compiled inner loops.

Everything here works on flat arrays: a system is given by its monomial-basis
coefficient vector ``c`` (BW coordinates times the square-rooted multinomial
weights), the stacked exponent matrix ``E`` and the block index ``blk`` of every
row of ``E``.  The public modules wrap these in typed objects.
"""

from __future__ import annotations

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_MAX_ITERS = 1
STATUS_SINGULAR = 2

# Relative singular-value floor below which a restricted Jacobian counts as singular.
RANK_TOL = 1e-14


@njit(cache=True)
def _powers(x, D):
    m = x.shape[0]
    P = np.empty((m, D + 1), dtype=np.complex128)
    for j in range(m):
        P[j, 0] = 1.0
        for e in range(1, D + 1):
            P[j, e] = P[j, e - 1] * x[j]
    return P


@njit(cache=True)
def evaluate(c, E, blk, n, D, x):
    P = _powers(x, D)
    out = np.zeros(n, dtype=np.complex128)
    m = x.shape[0]
    for r in range(E.shape[0]):
        v = c[r]
        for j in range(m):
            v *= P[j, E[r, j]]
        out[blk[r]] += v
    return out


@njit(cache=True)
def eval_jac(c, E, blk, n, D, x):
    """Values f(x) and the full n x (n+1) Jacobian in one pass."""
    P = _powers(x, D)
    m = x.shape[0]
    vals = np.zeros(n, dtype=np.complex128)
    jac = np.zeros((n, m), dtype=np.complex128)
    for r in range(E.shape[0]):
        cr = c[r]
        if cr == 0:
            continue
        i = blk[r]
        v = cr
        for j in range(m):
            v *= P[j, E[r, j]]
        vals[i] += v
        for j in range(m):
            e = E[r, j]
            if e == 0:
                continue
            w = cr * e * P[j, e - 1]
            for l in range(m):
                if l != j:
                    w *= P[l, E[r, l]]
            jac[i, j] += w
    return vals, jac


@njit(cache=True)
def tangent_basis(x):
    """Columns 1..n of the Householder reflector sending x to a multiple of e0."""
    m = x.shape[0]
    a = abs(x[0])
    if a > 0.0:
        ph = x[0] / a
    else:
        ph = 1.0 + 0.0j
    v = x.copy()
    v[0] += ph
    vn2 = 0.0
    for j in range(m):
        vn2 += v[j].real ** 2 + v[j].imag ** 2
    B = np.empty((m, m - 1), dtype=np.complex128)
    for j in range(m):
        for k in range(1, m):
            delta = 1.0 if j == k else 0.0
            B[j, k - 1] = delta - 2.0 * v[j] * np.conj(v[k]) / vn2
    return B


@njit(cache=True)
def jacobi_svd(A):
    """One-sided Jacobi SVD of a small square matrix.

    Returns (W, V, s) with A @ V = W, V unitary and the columns of W mutually
    orthogonal with norms s (unsorted).  Relative accuracy is preserved for
    graded matrices, which keeps large condition numbers meaningful.
    """
    m, n = A.shape
    W = A.copy()
    V = np.zeros((n, n), dtype=np.complex128)
    for k in range(n):
        V[k, k] = 1.0
    for _ in range(60):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                a = 0.0
                b = 0.0
                g = 0.0 + 0.0j
                for r in range(m):
                    a += W[r, p].real ** 2 + W[r, p].imag ** 2
                    b += W[r, q].real ** 2 + W[r, q].imag ** 2
                    g += np.conj(W[r, p]) * W[r, q]
                ag = abs(g)
                if ag == 0.0 or ag <= 1e-15 * np.sqrt(a * b):
                    continue
                rotated = True
                ph = g / ag
                zeta = (b - a) / (2.0 * ag)
                t = 1.0 / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = c * t
                cph = np.conj(ph)
                for r in range(m):
                    wp = W[r, p]
                    wq = W[r, q] * cph
                    W[r, p] = c * wp - sn * wq
                    W[r, q] = sn * wp + c * wq
                for r in range(n):
                    vp = V[r, p]
                    vq = V[r, q] * cph
                    V[r, p] = c * vp - sn * vq
                    V[r, q] = sn * vp + c * vq
        if not rotated:
            break
    s = np.empty(n)
    for k in range(n):
        acc = 0.0
        for r in range(m):
            acc += W[r, k].real ** 2 + W[r, k].imag ** 2
        s[k] = np.sqrt(acc)
    return W, V, s


@njit(cache=True)
def inverse_norm(A, frobenius, ref):
    """Norm of A^{-1} (spectral or Frobenius); inf when A is singular.

    A counts as singular when its smallest singular value is below RANK_TOL
    times max(largest singular value, ref).
    """
    _, _, s = jacobi_svd(A)
    return _inverse_norm_of(s, frobenius, ref)


@njit(cache=True)
def _restrict(J1, J2, t, B, row_scale):
    """(t*J1 + (1-t)*J2) @ B with row i multiplied by row_scale[i]."""
    n, m = J1.shape
    k = B.shape[1]
    u = 1.0 - t
    A = np.zeros((n, k), dtype=np.complex128)
    for i in range(n):
        for j in range(m):
            a = t * J1[i, j] + u * J2[i, j]
            if a == 0:
                continue
            for l in range(k):
                A[i, l] += a * B[j, l]
        for l in range(k):
            A[i, l] *= row_scale[i]
    return A


@njit(cache=True)
def scaled_restricted(jac, B, inv_sqrt_deg):
    return _restrict(jac, jac, 1.0, B, inv_sqrt_deg)


@njit(cache=True)
def _frob(J):
    acc = 0.0
    for i in range(J.shape[0]):
        for j in range(J.shape[1]):
            acc += J[i, j].real ** 2 + J[i, j].imag ** 2
    return np.sqrt(acc)


@njit(cache=True)
def newton_from(vals, jac, x, B):
    """Projective Newton update given f(x), Df(x) and a tangent basis at x.

    Returns (x_new, ok); ok is False when Df(x)|T_x is numerically singular
    relative to the full Jacobian.
    """
    n = jac.shape[0]
    A = _restrict(jac, jac, 1.0, B, np.ones(n))
    W = np.empty((n, n), dtype=np.complex128)
    V = np.empty((n, n), dtype=np.complex128)
    s = np.empty(n)
    w = np.empty(n, dtype=np.complex128)
    xn = np.empty(x.shape[0], dtype=np.complex128)
    ok = _newton_into(vals, A, x, B, W, V, s, w, xn, _frob(jac))
    if not ok:
        return x.copy(), False
    return xn, True


@njit(cache=True)
def newton_step(c, E, blk, n, D, x):
    vals, jac = eval_jac(c, E, blk, n, D, x)
    B = tangent_basis(x)
    return newton_from(vals, jac, x, B)


@njit(cache=True)
def mu_norm(c, E, blk, n, D, inv_sqrt_deg, fnorm, x, frobenius):
    _, jac = eval_jac(c, E, blk, n, D, x)
    B = tangent_basis(x)
    A = scaled_restricted(jac, B, inv_sqrt_deg)
    return fnorm * inverse_norm(A, frobenius, fnorm)


@njit(cache=True)
def t_of_tau(tau, alpha, r, s):
    st = np.sin(tau * alpha)
    return s * st / (r * np.sin((1.0 - tau) * alpha) + s * st)


@njit(cache=True)
def _eval_pair_into(cf, cg, E, blk, D, x, P, F, G, JF, JG):
    """f(x), g(x), Df(x), Dg(x) into preallocated buffers, sharing monomial products."""
    m = x.shape[0]
    for j in range(m):
        P[j, 0] = 1.0
        for e in range(1, D + 1):
            P[j, e] = P[j, e - 1] * x[j]
    for i in range(F.shape[0]):
        F[i] = 0.0
        G[i] = 0.0
        for j in range(m):
            JF[i, j] = 0.0
            JG[i, j] = 0.0
    for r in range(E.shape[0]):
        a = cf[r]
        b = cg[r]
        if a == 0 and b == 0:
            continue
        i = blk[r]
        v = 1.0 + 0.0j
        for j in range(m):
            v *= P[j, E[r, j]]
        F[i] += a * v
        G[i] += b * v
        for j in range(m):
            e = E[r, j]
            if e == 0:
                continue
            w = e * P[j, e - 1]
            for l in range(m):
                if l != j:
                    w *= P[l, E[r, l]]
            JF[i, j] += a * w
            JG[i, j] += b * w


@njit(cache=True)
def _householder_into(x, v, B):
    m = x.shape[0]
    a = abs(x[0])
    if a > 0.0:
        ph = x[0] / a
    else:
        ph = 1.0 + 0.0j
    for j in range(m):
        v[j] = x[j]
    v[0] += ph
    vn2 = 0.0
    for j in range(m):
        vn2 += v[j].real ** 2 + v[j].imag ** 2
    for j in range(m):
        for k in range(1, m):
            delta = 1.0 if j == k else 0.0
            B[j, k - 1] = delta - 2.0 * v[j] * np.conj(v[k]) / vn2


@njit(cache=True)
def _restrict_into(J1, J2, t, B, row_scale, A):
    n, m = J1.shape
    k = B.shape[1]
    u = 1.0 - t
    for i in range(n):
        for l in range(k):
            A[i, l] = 0.0
        for j in range(m):
            a = t * J1[i, j] + u * J2[i, j]
            if a == 0:
                continue
            for l in range(k):
                A[i, l] += a * B[j, l]
        for l in range(k):
            A[i, l] *= row_scale[i]


@njit(cache=True)
def _jacobi_into(A, W, V, s):
    """In-place variant of jacobi_svd writing into W, V, s."""
    m, n = A.shape
    for i in range(m):
        for j in range(n):
            W[i, j] = A[i, j]
    for i in range(n):
        for j in range(n):
            V[i, j] = 1.0 if i == j else 0.0
    for _ in range(60):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                a = 0.0
                b = 0.0
                g = 0.0 + 0.0j
                for r in range(m):
                    a += W[r, p].real ** 2 + W[r, p].imag ** 2
                    b += W[r, q].real ** 2 + W[r, q].imag ** 2
                    g += np.conj(W[r, p]) * W[r, q]
                ag = abs(g)
                if ag == 0.0 or ag <= 1e-15 * np.sqrt(a * b):
                    continue
                rotated = True
                ph = g / ag
                zeta = (b - a) / (2.0 * ag)
                t = 1.0 / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = c * t
                cph = np.conj(ph)
                for r in range(m):
                    wp = W[r, p]
                    wq = W[r, q] * cph
                    W[r, p] = c * wp - sn * wq
                    W[r, q] = sn * wp + c * wq
                for r in range(n):
                    vp = V[r, p]
                    vq = V[r, q] * cph
                    V[r, p] = c * vp - sn * vq
                    V[r, q] = sn * vp + c * vq
        if not rotated:
            break
    for k in range(n):
        acc = 0.0
        for r in range(m):
            acc += W[r, k].real ** 2 + W[r, k].imag ** 2
        s[k] = np.sqrt(acc)


@njit(cache=True)
def _inverse_norm_of(s, frobenius, ref):
    smin = s.min()
    smax = max(s.max(), ref)
    if not (smin > RANK_TOL * smax) or not np.isfinite(smin):
        return np.inf
    if frobenius:
        acc = 0.0
        for k in range(s.shape[0]):
            acc += 1.0 / (s[k] * s[k])
        return np.sqrt(acc)
    return 1.0 / smin


@njit(cache=True)
def _newton_into(vals, A, x, B, W, V, s, w, xn, ref):
    """x - B A^{-1} vals, normalized, into xn; False if A is numerically singular."""
    _jacobi_into(A, W, V, s)
    n = s.shape[0]
    smin = s.min()
    if not (smin > RANK_TOL * max(s.max(), ref)) or not np.isfinite(smin):
        return False
    m = x.shape[0]
    for k in range(n):
        acc = 0.0 + 0.0j
        for i in range(n):
            acc += np.conj(W[i, k]) * vals[i]
        w[k] = acc / (s[k] * s[k])
    for j in range(m):
        xn[j] = x[j]
    for i in range(n):
        yi = 0.0 + 0.0j
        for k in range(n):
            yi += V[i, k] * w[k]
        for j in range(m):
            xn[j] -= B[j, i] * yi
    nrm = 0.0
    for j in range(m):
        nrm += xn[j].real ** 2 + xn[j].imag ** 2
    nrm = np.sqrt(nrm)
    if not np.isfinite(nrm) or nrm == 0.0:
        return False
    for j in range(m):
        xn[j] /= nrm
    return True


@njit(cache=True)
def alh_loop(cf, cg, E, blk, n, D, inv_sqrt_deg, x0, alpha, r, s, re_fg,
             lam, max_iters, frobenius):
    """The adaptive linear homotopy loop.

    Returns (x, k, status, taus, ts, mus, dtaus); the step arrays have length k.
    ``dtaus`` holds the step-size rule value before clipping tau at 1.
    All per-step work happens in preallocated buffers.
    """
    cap = 1024
    taus = np.empty(cap)
    ts = np.empty(cap)
    mus = np.empty(cap)
    dtaus = np.empty(cap)
    m = n + 1
    scale = alpha * D ** 1.5
    ones = np.ones(n)
    P = np.empty((m, D + 1), dtype=np.complex128)
    F = np.empty(n, dtype=np.complex128)
    G = np.empty(n, dtype=np.complex128)
    Fq = np.empty(n, dtype=np.complex128)
    JF = np.empty((n, m), dtype=np.complex128)
    JG = np.empty((n, m), dtype=np.complex128)
    hv = np.empty(m, dtype=np.complex128)
    B = np.empty((m, n), dtype=np.complex128)
    A = np.empty((n, n), dtype=np.complex128)
    W = np.empty((n, n), dtype=np.complex128)
    V = np.empty((n, n), dtype=np.complex128)
    sv = np.empty(n)
    w = np.empty(n, dtype=np.complex128)
    x = x0.copy()
    xn = np.empty(m, dtype=np.complex128)
    tau = 0.0
    t = 0.0
    k = 0
    status = STATUS_OK
    while True:
        if k >= max_iters:
            status = STATUS_MAX_ITERS
            break
        _eval_pair_into(cf, cg, E, blk, D, x, P, F, G, JF, JG)
        _householder_into(x, hv, B)
        qn2 = t * t * r * r + (1.0 - t) * (1.0 - t) * s * s + 2.0 * t * (1.0 - t) * re_fg
        qnorm = np.sqrt(max(qn2, 0.0))
        _restrict_into(JF, JG, t, B, inv_sqrt_deg, A)
        _jacobi_into(A, W, V, sv)
        mu = qnorm * _inverse_norm_of(sv, frobenius, qnorm)
        if not np.isfinite(mu):
            status = STATUS_SINGULAR
            break
        dtau = lam / (scale * mu * mu)
        tau = min(1.0, tau + dtau)
        t = t_of_tau(tau, alpha, r, s)
        for i in range(n):
            Fq[i] = t * F[i] + (1.0 - t) * G[i]
        _restrict_into(JF, JG, t, B, ones, A)
        jref = 0.0
        for i in range(n):
            for j in range(m):
                v = t * JF[i, j] + (1.0 - t) * JG[i, j]
                jref += v.real ** 2 + v.imag ** 2
        if not _newton_into(Fq, A, x, B, W, V, sv, w, xn, np.sqrt(jref)):
            status = STATUS_SINGULAR
            break
        x, xn = xn, x
        if k == cap:
            cap *= 2
            taus = _grow(taus, cap)
            ts = _grow(ts, cap)
            mus = _grow(mus, cap)
            dtaus = _grow(dtaus, cap)
        taus[k] = tau
        ts[k] = t
        mus[k] = mu
        dtaus[k] = dtau
        k += 1
        if tau >= 1.0:
            break
    return x, k, status, taus[:k].copy(), ts[:k].copy(), mus[:k].copy(), dtaus[:k].copy()


@njit(cache=True)
def _grow(a, cap):
    b = np.empty(cap)
    b[: a.shape[0]] = a
    return b

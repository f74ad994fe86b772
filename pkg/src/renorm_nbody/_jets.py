"""Compiled binary64 kernel for the N-body jet recurrences.

Same recurrences as the array version in :mod:`renorm_nbody.series`, written
as explicit loops so that numba can compile them; for a handful of bodies the
array version spends nearly all of its time in per-call overhead.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

KIND_CODES = {None: 0, "s0": 0, "s1": 1, "s2": 2, "s3": 3, "s4": 4}


def _pow_next(u, w, k, p):
    """k-th coefficient of ``u^p`` for 2-D ``u``/``w`` indexed ``[order, pair]``."""
    n = u.shape[1]
    out = np.empty(n)
    for m in range(n):
        if k == 0:
            out[m] = u[0, m] ** p
        else:
            acc = 0.0
            for j in range(1, k + 1):
                acc += (p * j - (k - j)) * u[j, m] * w[k - j, m]
            out[m] = acc / (k * u[0, m])
    return out


def _scalar_pow_next(u, w, k, p):
    if k == 0:
        return u[0] ** p
    acc = 0.0
    for j in range(1, k + 1):
        acc += (p * j - (k - j)) * u[j] * w[k - j]
    return acc / (k * u[0])


def _jets(q0, v0, t0, K, kind, kappa, gm, I, J):
    n = q0.shape[0]
    npairs = I.shape[0]
    q = np.zeros((K + 1, n, 3))
    v = np.zeros((K + 1, n, 3))
    t = np.zeros(K + 1)
    q[0] = q0
    v[0] = v0
    t[0] = t0
    r = np.zeros((K + 1, npairs, 3))
    rr = np.zeros((K + 1, npairs))
    d3 = np.zeros((K + 1, npairs))
    f = np.zeros((K + 1, npairs, 3))
    g = np.zeros((K + 1, n, 3))
    s = np.zeros(K + 1)
    z = np.zeros(K + 1)
    w = np.zeros((K + 1, npairs, 3))
    ww = np.zeros((K + 1, npairs))
    x = np.zeros((K + 1, npairs))
    inv = np.zeros((K + 1, npairs))
    r1 = np.zeros((K + 1, npairs))
    kk = np.zeros((K + 1, npairs))
    a_sum = np.zeros(K + 1)
    b_sum = np.zeros(K + 1)
    kb = np.zeros(n)
    pgm = np.empty(npairs)
    for p in range(npairs):
        pgm[p] = gm[I[p]] + gm[J[p]]

    for k in range(K):
        for p in range(npairs):
            for d in range(3):
                r[k, p, d] = q[k, I[p], d] - q[k, J[p], d]
            acc = 0.0
            for l in range(k + 1):
                for d in range(3):
                    acc += r[l, p, d] * r[k - l, p, d]
            rr[k, p] = acc
        d3[k] = _pow_next(rr, d3, k, -1.5)
        for p in range(npairs):
            for d in range(3):
                acc = 0.0
                for l in range(k + 1):
                    acc += d3[l, p] * r[k - l, p, d]
                f[k, p, d] = acc
        for p in range(npairs):
            for d in range(3):
                g[k, I[p], d] -= gm[J[p]] * f[k, p, d]
                g[k, J[p], d] += gm[I[p]] * f[k, p, d]

        if kind == 0:
            for i in range(n):
                for d in range(3):
                    q[k + 1, i, d] = v[k, i, d] / (k + 1)
                    v[k + 1, i, d] = g[k, i, d] / (k + 1)
            t[k + 1] = 1.0 if k == 0 else 0.0
            continue

        xsum = 0.0
        if kind <= 3:
            for p in range(npairs):
                for d in range(3):
                    w[k, p, d] = v[k, I[p], d] - v[k, J[p], d]
                acc = 0.0
                for l in range(k + 1):
                    for d in range(3):
                        acc += w[l, p, d] * w[k - l, p, d]
                ww[k, p] = acc
                acc = ww[k, p]
                for l in range(1, k + 1):
                    acc -= rr[l, p] * x[k - l, p]
                x[k, p] = acc / rr[0, p]
                xsum += x[k, p]
        if kind == 1 or kind == 2:
            for p in range(npairs):
                acc = 1.0 if k == 0 else 0.0
                for l in range(1, k + 1):
                    acc -= rr[l, p] * inv[k - l, p]
                inv[k, p] = acc / rr[0, p]
            r1[k] = _pow_next(rr, r1, k, -0.5)
        if kind == 1:
            kb[:] = 0.0
            for p in range(npairs):
                kb[I[p]] += gm[J[p]] * inv[k, p]
                kb[J[p]] += gm[I[p]] * inv[k, p]
            acc = xsum
            for p in range(npairs):
                kk[k, p] = kb[I[p]] + kb[J[p]]
                for l in range(k + 1):
                    acc += kk[l, p] * r1[k - l, p]
            z[k] = acc
        elif kind == 2:
            sa = 0.0
            sb = 0.0
            for p in range(npairs):
                sa += r1[k, p]
                sb += pgm[p] * inv[k, p]
            a_sum[k] = sa
            b_sum[k] = sb
            acc = xsum
            for l in range(k + 1):
                acc += a_sum[l] * b_sum[k - l]
            z[k] = acc
        else:
            acc = kappa * xsum if kind == 3 else 0.0
            for p in range(npairs):
                acc += pgm[p] * d3[k, p]
            z[k] = acc
        if k == 0 and not z[0] > 0.0:
            return q, v, t, s, False
        s[k] = _scalar_pow_next(z, s, k, -0.5)
        for i in range(n):
            for d in range(3):
                aq = 0.0
                av = 0.0
                for l in range(k + 1):
                    aq += s[l] * v[k - l, i, d]
                    av += s[l] * g[k - l, i, d]
                q[k + 1, i, d] = aq / (k + 1)
                v[k + 1, i, d] = av / (k + 1)
        t[k + 1] = s[k] / (k + 1)
    return q, v, t, s, True


if njit is not None:
    _pow_next = njit(cache=True)(_pow_next)
    _scalar_pow_next = njit(cache=True)(_scalar_pow_next)
    jets_f64 = njit(cache=True)(_jets)
    COMPILED = True
else:  # pragma: no cover
    jets_f64 = None
    COMPILED = False

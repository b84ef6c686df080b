"""Numba-compiled statevector kernels (default backend).

Same folded-argument contract as _np_kernels; numba specializes each
kernel for float64 and complex128 amplitudes from the one source.
"""

from __future__ import annotations

from numba import njit


@njit(inline="always", cache=True)
def _psign(v):
    v ^= v >> 32
    v ^= v >> 16
    v ^= v >> 8
    v ^= v >> 4
    v ^= v >> 2
    v ^= v >> 1
    return -1.0 if v & 1 else 1.0


@njit(cache=True)
def rotate_folded(a, x, z, c, w):
    n = a.shape[0]
    if x == 0:
        for b in range(n):
            a[b] = (c + w * _psign(b & z)) * a[b]
    else:
        # enumerate each {b, b^x} pair once by inserting a zero bit at
        # the lowest set bit of x
        pivot = x & (-x)
        low = pivot - 1
        for i in range(n >> 1):
            b = ((i & ~low) << 1) | (i & low)
            p = b ^ x
            ab = a[b]
            ap = a[p]
            a[b] = c * ab + (w * _psign(p & z)) * ap
            a[p] = c * ap + (w * _psign(b & z)) * ab


@njit(cache=True)
def rotate_seq_folded(a, xs, zs, cs, ws):
    for k in range(cs.shape[0]):
        rotate_folded(a, xs[k], zs[k], cs[k], ws[k])


@njit(cache=True)
def pauli_folded(a, x, z, ph, out):
    n = a.shape[0]
    for b in range(n):
        out[b ^ x] = (ph * _psign(b & z)) * a[b]


@njit(cache=True)
def pauli_batch_folded(a, xs, zs, phs, out):
    for p in range(xs.shape[0]):
        pauli_folded(a, xs[p], zs[p], phs[p], out[p])


@njit(cache=True)
def sum_folded(a, xs, zs, ws, out):
    n = a.shape[0]
    out[:] = 0
    for t in range(ws.shape[0]):
        x = xs[t]
        z = zs[t]
        w = ws[t]
        if x == 0:
            for b in range(n):
                out[b] += (w * _psign(b & z)) * a[b]
        else:
            for b in range(n):
                out[b ^ x] += (w * _psign(b & z)) * a[b]


@njit(cache=True)
def fwht_inplace(a):
    dim = a.shape[0]
    h = 1
    while h < dim:
        step = 2 * h
        for i in range(0, dim, step):
            for j in range(i, i + h):
                top = a[j]
                bot = a[j + h]
                a[j] = top + bot
                a[j + h] = top - bot
        h = step


@njit(cache=True)
def forward_partials_folded(ref, xs, zs, cs, ws, out):
    out[0] = ref
    for k in range(cs.shape[0]):
        out[k + 1] = out[k]
        rotate_folded(out[k + 1], xs[k], zs[k], cs[k], ws[k])


@njit(cache=True)
def derivative_branches_folded(partials, xs, zs, phs, cs, ws, d_out):
    n_gen = cs.shape[0]
    for mu in range(1, n_gen + 1):
        row = d_out[mu - 1]
        pauli_folded(partials[mu], xs[mu - 1], zs[mu - 1], phs[mu - 1], row)
        for g in range(mu, n_gen):
            rotate_folded(row, xs[g], zs[g], cs[g], ws[g])

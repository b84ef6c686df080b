"""Pure-numpy statevector kernels (fallback backend).

All functions take pre-folded scalars/arrays: rotation weights
w = sin(theta) * i^(y-1) and term weights already carry the i^y phase,
with dtype matching the amplitude array.  See kernels.py for folding.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _indices(dim: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _parity_signs(values: np.ndarray) -> np.ndarray:
    """(-1)^popcount per element, as float64."""
    return 1.0 - 2.0 * (np.bitwise_count(values) & 1).astype(np.float64)


def rotate_folded(a, x, z, c, w):
    """In place: a <- cos-term + w * sign(z & partner) * a[partner], partner = b ^ x."""
    idx = _indices(a.shape[0])
    if x == 0:
        a *= c + w * _parity_signs(idx & z)
    else:
        a[:] = c * a + w * (_parity_signs(idx & z) * a)[idx ^ x]


def rotate_seq_folded(a, xs, zs, cs, ws):
    for k in range(len(cs)):
        rotate_folded(a, xs[k], zs[k], cs[k], ws[k])


def pauli_folded(a, x, z, ph, out):
    """out[b ^ x] = ph * sign(z & b) * a[b]."""
    idx = _indices(a.shape[0])
    signed = _parity_signs(idx & z) * a
    if x == 0:
        np.multiply(signed, ph, out=out)
    else:
        np.multiply(signed[idx ^ x], ph, out=out)


def pauli_batch_folded(a, xs, zs, phs, out):
    for p in range(len(xs)):
        pauli_folded(a, xs[p], zs[p], phs[p], out[p])


def sum_folded(a, xs, zs, ws, out):
    """out = sum_t ws[t] * P_t-action(a), accumulated term by term."""
    idx = _indices(a.shape[0])
    out[:] = 0
    for t in range(len(ws)):
        signed = _parity_signs(idx & zs[t]) * a
        if xs[t]:
            signed = signed[idx ^ xs[t]]
        out += ws[t] * signed


def fwht_inplace(a):
    """Unnormalized fast Walsh-Hadamard transform, qubit 0 = LSB."""
    dim = a.shape[0]
    h = 1
    while h < dim:
        blocks = a.reshape(-1, 2, h)
        top = blocks[:, 0, :].copy()
        blocks[:, 0, :] += blocks[:, 1, :]
        blocks[:, 1, :] = top - blocks[:, 1, :]
        h *= 2


def forward_partials_folded(ref, xs, zs, cs, ws, out):
    """out[k] = product of the first k rotations applied to ref, k = 0..K."""
    out[0] = ref
    for k in range(len(cs)):
        out[k + 1] = out[k]
        rotate_folded(out[k + 1], xs[k], zs[k], cs[k], ws[k])


def derivative_branches_folded(partials, xs, zs, phs, cs, ws, d_out):
    """Branch mu: insert the folded generator after rotation mu, then finish the product."""
    n_gen = len(cs)
    for mu in range(1, n_gen + 1):
        row = d_out[mu - 1]
        pauli_folded(partials[mu], xs[mu - 1], zs[mu - 1], phs[mu - 1], row)
        for g in range(mu, n_gen):
            rotate_folded(row, xs[g], zs[g], cs[g], ws[g])

"""Backend dispatch and phase folding for the statevector kernels.

The numba backend is used by default; set AVQMETTS_NO_NUMBA=1 to force
the pure-numpy fallback (also used automatically when numba cannot be
imported).  Both backends implement identical folded primitives; this
module folds Pauli y-counts and rotation angles into dtype-matched
scalars before dispatching.

Amplitude arrays may be float64 or complex128.  The float64 path is
valid only when every folded phase is real (odd-y rotation generators,
even-y operator terms); callers violating that get a ValueError.
"""

from __future__ import annotations

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def _select_backend():
    flag = os.environ.get("AVQMETTS_NO_NUMBA", "").strip().lower()
    if flag in {"1", "true", "yes", "on"}:
        from . import _np_kernels

        return _np_kernels, "numpy"
    try:
        from . import _nb_kernels

        return _nb_kernels, "numba"
    except ImportError:
        logger.warning("numba unavailable, falling back to numpy kernels")
        from . import _np_kernels

        return _np_kernels, "numpy"


_backend, BACKEND = _select_backend()


def backend_name() -> str:
    return BACKEND


def _phase_scalar(k: int, dtype):
    ph = _I_POW[k % 4]
    if dtype == np.complex128:
        return ph
    if ph.imag != 0.0:
        raise ValueError("complex Pauli phase on real amplitudes; use complex128 state")
    return ph.real


def _phase_array(ks: np.ndarray, dtype) -> np.ndarray:
    ph = np.asarray(_I_POW, dtype=np.complex128)[np.asarray(ks) % 4]
    if dtype == np.complex128:
        return ph
    if np.any(ph.imag != 0.0):
        raise ValueError("complex Pauli phase on real amplitudes; use complex128 state")
    return ph.real.copy()


def rotate(amps: np.ndarray, x: int, z: int, y: int, theta: float) -> None:
    """In place: amps <- exp(-i*theta*P) amps for Pauli string (x, z, y_count=y)."""
    w = _phase_scalar(y + 3, amps.dtype) * np.sin(theta)
    _backend.rotate_folded(amps, np.int64(x), np.int64(z), np.cos(theta), w)


def rotate_seq(amps: np.ndarray, xs, zs, ys, thetas) -> None:
    """In place: apply rotations in order (index 0 acts first)."""
    if len(thetas) == 0:
        return
    cs = np.cos(thetas)
    ws = np.sin(thetas) * _phase_array(np.asarray(ys) + 3, amps.dtype)
    _backend.rotate_seq_folded(amps, np.asarray(xs, dtype=np.int64), np.asarray(zs, dtype=np.int64), cs, ws)


def pauli_apply(amps: np.ndarray, x: int, z: int, k: int, out: np.ndarray | None = None) -> np.ndarray:
    """Return i^k * (X^x Z^z)-action applied to amps (k = y_count gives the plain string)."""
    if out is None:
        out = np.empty_like(amps)
    _backend.pauli_folded(amps, np.int64(x), np.int64(z), _phase_scalar(k, amps.dtype), out)
    return out


def pauli_apply_batch(amps: np.ndarray, xs, zs, ks, out: np.ndarray | None = None) -> np.ndarray:
    """Rows of the result: i^(ks[p]) * string_p applied to amps."""
    xs = np.asarray(xs, dtype=np.int64)
    if out is None:
        out = np.empty((len(xs), amps.shape[0]), dtype=amps.dtype)
    phs = _phase_array(ks, amps.dtype)
    _backend.pauli_batch_folded(amps, xs, np.asarray(zs, dtype=np.int64), phs, out)
    return out


def sum_apply(amps: np.ndarray, coeffs, xs, zs, ys, out: np.ndarray | None = None) -> np.ndarray:
    """Apply a real-weighted Pauli sum: sum_t coeffs[t] * P_t."""
    if out is None:
        out = np.empty_like(amps)
    ws = np.asarray(coeffs, dtype=np.float64) * _phase_array(ys, amps.dtype)
    _backend.sum_folded(amps, np.asarray(xs, dtype=np.int64), np.asarray(zs, dtype=np.int64), ws, out)
    return out


def hadamard_all(amps: np.ndarray) -> None:
    """In place: apply the Hadamard rotation on every qubit."""
    _backend.fwht_inplace(amps)
    amps *= 1.0 / np.sqrt(amps.shape[0])


def forward_partials(ref: np.ndarray, xs, zs, ys, thetas) -> np.ndarray:
    """(K+1, dim) array of partial rotation products; row k has the first k rotations."""
    n_gen = len(thetas)
    out = np.empty((n_gen + 1, ref.shape[0]), dtype=ref.dtype)
    if n_gen == 0:
        out[0] = ref
        return out
    cs = np.cos(thetas)
    ws = np.sin(thetas) * _phase_array(np.asarray(ys) + 3, ref.dtype)
    _backend.forward_partials_folded(
        ref, np.asarray(xs, dtype=np.int64), np.asarray(zs, dtype=np.int64), cs, ws, out
    )
    return out


def derivative_branches(partials: np.ndarray, xs, zs, ys, thetas) -> np.ndarray:
    """(K, dim) tangent states: -i*A_mu inserted after rotation mu, product completed."""
    n_gen = len(thetas)
    d_out = np.empty((n_gen, partials.shape[1]), dtype=partials.dtype)
    if n_gen == 0:
        return d_out
    ys = np.asarray(ys)
    cs = np.cos(thetas)
    ws = np.sin(thetas) * _phase_array(ys + 3, partials.dtype)
    phs = _phase_array(ys + 3, partials.dtype)
    _backend.derivative_branches_folded(
        partials,
        np.asarray(xs, dtype=np.int64),
        np.asarray(zs, dtype=np.int64),
        phs,
        cs,
        ws,
        d_out,
    )
    return d_out

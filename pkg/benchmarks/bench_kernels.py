#!/usr/bin/env python3
"""Benchmark the numba statevector kernels against the pure-numpy fallback.

Times the three hot operations (rotation sweep, tangent-branch build,
operator application) on both backends across system sizes, on the real
(float64) path the production evolver uses and on complex128.

Usage: python benchmarks/bench_kernels.py [--sizes 8 12 ...] [--gates 64]
"""

import argparse
import time

import numpy as np

from avqmetts import _nb_kernels, _np_kernels
from avqmetts.model import build_pool
from avqmetts.pauli import pauli_strings_to_arrays

BACKENDS = {"numba": _nb_kernels, "numpy": _np_kernels}


def make_workload(n_qubits, n_gates, dtype, rng):
    pool = build_pool(n_qubits)
    pick = rng.integers(0, len(pool), size=n_gates)
    xs, zs, ys = pauli_strings_to_arrays([pool[i] for i in pick])
    thetas = rng.normal(scale=0.3, size=n_gates)
    cs = np.cos(thetas)
    ws = np.sin(thetas) * np.asarray([(1j) ** int((y + 3) % 4) for y in ys])
    phs = np.asarray([(1j) ** int((y + 3) % 4) for y in ys])
    if dtype == np.float64:
        ws = ws.real.copy()
        phs = phs.real.copy()
    amps = rng.normal(size=1 << n_qubits)
    if dtype == np.complex128:
        amps = amps + 1j * rng.normal(size=1 << n_qubits)
    amps = (amps / np.linalg.norm(amps)).astype(dtype)
    return amps, xs, zs, phs, cs, ws


def time_op(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n_qubits, n_gates, dtype, rng):
    rows = []
    for name, backend in BACKENDS.items():
        amps, xs, zs, phs, cs, ws = make_workload(n_qubits, n_gates, dtype, rng)
        work = amps.copy()
        backend.rotate_seq_folded(work, xs, zs, cs, ws)  # warm up JIT

        def rotations():
            backend.rotate_seq_folded(work, xs, zs, cs, ws)

        partials = np.empty((n_gates + 1, amps.shape[0]), dtype=dtype)
        d_out = np.empty((n_gates, amps.shape[0]), dtype=dtype)
        backend.forward_partials_folded(amps, xs, zs, cs, ws, partials)

        def branches():
            backend.derivative_branches_folded(partials, xs, zs, phs, cs, ws, d_out)

        out = np.empty_like(amps)

        def op_apply():
            backend.sum_folded(amps, xs, zs, ws, out)

        rows.append(
            (
                name,
                time_op(rotations) / n_gates * 1e6,
                time_op(branches) * 1e3,
                time_op(op_apply) * 1e3,
            )
        )
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 10, 12, 14])
    parser.add_argument("--gates", type=int, default=64)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{args.gates} gates per sweep; rotation cost is per gate")
    header = f"{'N':>3} {'dtype':>10} {'backend':>7} {'rotate us/gate':>15} {'branches ms':>12} {'sum-apply ms':>13}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        for dtype in (np.float64, np.complex128):
            rows = bench(n, args.gates, dtype, rng)
            for name, rot, br, op in rows:
                print(f"{n:>3} {np.dtype(dtype).name:>10} {name:>7} {rot:>15.2f} {br:>12.2f} {op:>13.3f}")
            speed = rows[1][1] / rows[0][1]
            print(f"{'':>3} {'':>10} {'':>7} {'numba speedup x%.1f' % speed:>15}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Reduced-S pilot of the Binder-crossing production protocol.

Same physics as acceptance criterion 9 (2D TFIM, beta = 1.7, U4 vs ED
per grid point, 3x3-vs-4x3 crossing) at a sample size that fits a small
machine; the full S >= 1000-per-point run is the `slow`-marked
acceptance test.  Appends one JSON line per completed (size, h_x) point
so partial runs remain usable.

Usage: python benchmarks/binder_pilot.py [--out pilot.jsonl] [--sw 4]
       [--s0 12] [--grid 2.8 2.9 3.0] [--workers 2]
"""

import argparse
import json
import time

import numpy as np

from avqmetts import analysis, ed, metts
from avqmetts.avqite import AvqiteParams
from avqmetts.model import IsingParams, Lattice, build_hamiltonian

BETA = 1.7


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="binder_pilot.jsonl")
    parser.add_argument("--sw", type=int, default=4)
    parser.add_argument("--s0", type=int, default=12)
    parser.add_argument("--burn-in", type=int, default=10)
    parser.add_argument("--grid", type=float, nargs="+", default=[2.8, 2.9, 3.0])
    parser.add_argument("--workers", type=int, default=2)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    curves = {}
    with open(args.out, "a") as fh:
        for lx, ly in ((3, 3), (4, 3)):
            label = f"{lx}x{ly}"
            m_vals = analysis.magnetization_per_bitstring(lx * ly)
            points = []
            for h_x in args.grid:
                t0 = time.perf_counter()
                ham = build_hamiltonian(Lattice.rectangle(lx, ly), IsingParams(1.0, h_x, 0.0))
                acc = metts.run_ensemble(
                    ham, BETA, AvqiteParams(), s_w=args.sw, s_0=args.s0,
                    burn_in=args.burn_in, master_seed=args.seed,
                    observables=("energy", "m2", "m4"), workers=args.workers,
                )
                u4 = analysis.binder_u4_from_records(acc)
                err = analysis.binder_error(acc, 1000, rng)
                spec = ed.diagonalize(ham)
                u4_ed = analysis.binder_u4(
                    ed.thermal_average_zdiag(spec, m_vals**2, BETA),
                    ed.thermal_average_zdiag(spec, m_vals**4, BETA),
                )
                row = {
                    "size": label, "h_x": h_x, "s": acc.size,
                    "u4": u4, "err": err, "u4_ed": u4_ed,
                    "agrees_2err": bool(abs(u4 - u4_ed) <= 2 * err),
                    "energy": acc.mean("energy"),
                    "energy_ed": ed.thermal_energy(spec, BETA),
                    "wall_s": round(time.perf_counter() - t0, 1),
                }
                fh.write(json.dumps(row) + "\n")
                fh.flush()
                print(row, flush=True)
                points.append(analysis.BinderPoint(h_x, {label: (u4, err)}, acc.size))
            curves[label] = points
        try:
            h_c, h_err = analysis.find_crossing(curves["3x3"], curves["4x3"], 1000, rng)
            result = {"crossing_h_x_c": h_c, "crossing_err": h_err, "expected": 2.87}
        except Exception as exc:  # report whatever the reduced grid gave us
            result = {"crossing_error": f"{type(exc).__name__}: {exc}"}
        fh.write(json.dumps(result) + "\n")
        print(result, flush=True)


if __name__ == "__main__":
    main()

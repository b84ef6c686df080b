"""Batch orchestration: config parsing, ensemble runs, ED references,
Binder scans with crossing extraction, and fidelity traces.

Run configurations are JSON files with model / avqite / sampling /
analysis / output blocks; command-line flags override file values.
All outputs are plot-ready CSV plus a JSON summary that echoes the fully
resolved configuration and master seed, so a run re-parses to an
equivalent config.  Exit codes: 0 success, 2 config error, 3 numerical
failure, 4 no crossing found.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, avqite, ed, metts, model
from .errors import AmbiguousCrossingError, ConfigError, NoCrossingError, NumericalError
from .state import Cps, X_BASIS, Z_BASIS

logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "AVQMETTS_OUTPUT_ROOT"

SCHEMA_RUN = "avqmetts/run-summary/v1"
SCHEMA_ED = "avqmetts/ed-summary/v1"
SCHEMA_CROSSING = "avqmetts/crossing/v1"
SCHEMA_FIDELITY = "avqmetts/fidelity/v1"


# --- configuration ----------------------------------------------------------


@dataclass
class ModelConfig:
    kind: str = model.CHAIN_1D
    lx: int = 4
    ly: int = 1
    pbc: bool = True
    j: float = 1.0
    h_x: float = 1.0
    h_z: float = 0.0

    def lattice(self) -> model.Lattice:
        return model.Lattice(self.kind, self.lx, self.ly, self.pbc)

    def hamiltonian(self) -> "model.WeightedPauliSum":
        return model.build_hamiltonian(self.lattice(), model.IsingParams(self.j, self.h_x, self.h_z))


@dataclass
class AvqiteConfig:
    delta_tau: float = 0.02
    l_cut: float = 1e-3
    solver_cutoff: float = 1e-6
    max_new_ops: int | None = None

    def params(self) -> avqite.AvqiteParams:
        return avqite.AvqiteParams(self.delta_tau, self.l_cut, self.solver_cutoff, self.max_new_ops)


@dataclass
class SamplingConfig:
    beta: list[float] = field(default_factory=lambda: [1.0])
    s_w: int = 8
    s_0: int = 8
    burn_in: int = 10
    master_seed: int = 1
    observables: list[str] = field(default_factory=lambda: ["energy"])
    first_collapse: str = X_BASIS


@dataclass
class AnalysisConfig:
    h_x_grid: list[float] = field(default_factory=list)
    sizes: list[list[int]] = field(default_factory=list)
    resamples: int = 1000
    convergence_h_x: float | None = None
    convergence_s_grid: list[int] = field(default_factory=list)


@dataclass
class OutputConfig:
    directory: str = "run"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    avqite: AvqiteConfig = field(default_factory=AvqiteConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        sections = {
            "model": ModelConfig,
            "avqite": AvqiteConfig,
            "sampling": SamplingConfig,
            "analysis": AnalysisConfig,
            "output": OutputConfig,
        }
        unknown = set(data) - set(sections)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {}
        for name, klass in sections.items():
            block = data.get(name, {})
            allowed = {f.name for f in dataclasses.fields(klass)}
            bad = set(block) - allowed
            if bad:
                raise ConfigError(f"unknown keys in '{name}' block: {sorted(bad)}")
            kwargs[name] = klass(**block)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        m, s = self.model, self.sampling
        for name, value in [("j", m.j), ("h_x", m.h_x), ("h_z", m.h_z)]:
            if not np.isfinite(value):
                raise ConfigError(f"model.{name} must be finite")
        if m.kind not in (model.CHAIN_1D, model.RECTANGLE_2D):
            raise ConfigError(f"unknown lattice kind {m.kind!r}")
        if m.lx < 1 or m.ly < 1:
            raise ConfigError("lattice dimensions must be positive")
        if any(b < 0 or not np.isfinite(b) for b in s.beta):
            raise ConfigError("beta values must be finite and non-negative")
        if s.s_w < 1 or s.s_0 < 1 or s.burn_in < 0:
            raise ConfigError("sampling sizes must be positive (burn_in non-negative)")
        if s.first_collapse not in (X_BASIS, Z_BASIS):
            raise ConfigError("first_collapse must be 'X' or 'Z'")
        for name in s.observables:
            if name not in metts.KNOWN_OBSERVABLES:
                raise ConfigError(f"unknown observable {name!r}")
        if self.avqite.delta_tau <= 0 or self.avqite.l_cut <= 0:
            raise ConfigError("avqite.delta_tau and avqite.l_cut must be positive")


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data)


def resolve_output_dir(cfg: RunConfig) -> Path:
    directory = Path(cfg.output.directory)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not directory.is_absolute():
        directory = Path(root) / directory
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# --- subcommands ------------------------------------------------------------


def cmd_run(cfg: RunConfig, workers: int) -> Path:
    out = resolve_output_dir(cfg)
    ham = cfg.model.hamiltonian()
    params = cfg.avqite.params()
    pool = model.build_pool(ham.n_qubits)
    s = cfg.sampling
    observables = list(s.observables)
    results = []
    all_rows = []
    for beta in s.beta:
        acc = metts.run_ensemble(
            ham,
            beta,
            params,
            s_w=s.s_w,
            s_0=s.s_0,
            burn_in=s.burn_in,
            master_seed=s.master_seed,
            observables=observables,
            workers=workers,
            first_collapse=s.first_collapse,
            pool=pool,
        )
        stats = metts.cnot_stats(acc)
        results.append(
            {
                "beta": beta,
                "s": acc.size,
                "means": {name: acc.mean(name) for name in observables},
                "stderr": {name: acc.stderr(name) for name in observables},
                "cnot": {
                    "mean": stats.mean,
                    "sigma": stats.sigma,
                    "by_basis": {b: {"mean": m, "sigma": sg} for b, (m, sg) in stats.by_basis.items()},
                },
            }
        )
        all_rows.append((beta, acc))
    with open(out / "samples.csv", "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["beta", "walker_id", "step_index", "origin_basis", "n_theta", "n_cx"] + observables)
        for beta, acc in all_rows:
            for r in acc.records:
                writer.writerow(
                    [repr(float(beta)), r.walker_id, r.step_index, r.origin_basis, r.n_theta, r.n_cx]
                    + [repr(r.observables[name]) for name in observables]
                )
    with open(out / "diagnostics.csv", "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["beta", "s", "ncx_mean", "ncx_sigma", "ncx_z_mean", "ncx_z_sigma", "ncx_x_mean", "ncx_x_sigma"]
        )
        for res in results:
            cn = res["cnot"]
            writer.writerow(
                [repr(float(res["beta"])), res["s"], repr(cn["mean"]), repr(cn["sigma"])]
                + [repr(cn["by_basis"][b][k]) for b in (Z_BASIS, X_BASIS) for k in ("mean", "sigma")]
            )
    _write_json(
        out / "summary.json",
        {
            "schema": SCHEMA_RUN,
            "config": cfg.to_dict(),
            "master_seed": s.master_seed,
            "results": results,
        },
    )
    return out


def cmd_ed(cfg: RunConfig) -> Path:
    out = resolve_output_dir(cfg)
    ham = cfg.model.hamiltonian()
    spec = ed.diagonalize(ham)
    with open(out / "spectrum.csv", "w") as fh:
        fh.write("level,energy\n")
        for k, e in enumerate(spec.eigenvalues):
            fh.write(f"{k},{float(e)!r}\n")
    m_vals = analysis.magnetization_per_bitstring(ham.n_qubits)
    rows = []
    for beta in cfg.sampling.beta:
        m2 = ed.thermal_average_zdiag(spec, m_vals**2, beta)
        m4 = ed.thermal_average_zdiag(spec, m_vals**4, beta)
        rows.append((beta, ed.thermal_energy(spec, beta), m2, m4, analysis.binder_u4(m2, m4)))
    with open(out / "thermal.csv", "w") as fh:
        fh.write("beta,energy,m2,m4,u4\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    _write_json(
        out / "ed_summary.json",
        {
            "schema": SCHEMA_ED,
            "config": cfg.to_dict(),
            "ground_energy": spec.ground_energy,
            "gap_above_ground_pair": spec.gap_above_ground_pair(),
        },
    )
    return out


def _binder_scan_one(cfg: RunConfig, lx: int, ly: int, h_x: float, workers: int):
    mc = dataclasses.replace(cfg.model, lx=lx, ly=ly, h_x=h_x)
    ham = mc.hamiltonian()
    acc = metts.run_ensemble(
        ham,
        cfg.sampling.beta[0],
        cfg.avqite.params(),
        s_w=cfg.sampling.s_w,
        s_0=cfg.sampling.s_0,
        burn_in=cfg.sampling.burn_in,
        master_seed=cfg.sampling.master_seed,
        observables=("energy", "m2", "m4"),
        workers=workers,
        first_collapse=cfg.sampling.first_collapse,
    )
    return mc, acc


def cmd_binder(cfg: RunConfig, workers: int) -> Path:
    out = resolve_output_dir(cfg)
    an = cfg.analysis
    if len(an.sizes) < 2:
        raise ConfigError("binder analysis needs at least two lattice sizes")
    if not an.h_x_grid:
        raise ConfigError("binder analysis needs a non-empty h_x grid")
    beta = cfg.sampling.beta[0]
    rng = np.random.default_rng(cfg.sampling.master_seed)
    curves: dict[str, list[analysis.BinderPoint]] = {}
    csv_rows = []
    convergence_rows = []
    for lx, ly in an.sizes:
        label = dataclasses.replace(cfg.model, lx=lx, ly=ly).lattice().label
        if lx * ly <= ed.DEFAULT_QUBIT_CAP:
            m_vals = analysis.magnetization_per_bitstring(lx * ly)
        points = []
        for h_x in an.h_x_grid:
            mc, acc = _binder_scan_one(cfg, lx, ly, h_x, workers)
            u4 = analysis.binder_u4_from_records(acc)
            err = analysis.binder_error(acc, an.resamples, rng)
            points.append(analysis.BinderPoint(h_x, {label: (u4, err)}, acc.size))
            u4_ed = ""
            if lx * ly <= ed.DEFAULT_QUBIT_CAP:
                ed_spec = ed.diagonalize(mc.hamiltonian())
                u4_ed = repr(
                    analysis.binder_u4(
                        ed.thermal_average_zdiag(ed_spec, m_vals**2, beta),
                        ed.thermal_average_zdiag(ed_spec, m_vals**4, beta),
                    )
                )
            csv_rows.append((repr(float(h_x)), label, repr(u4), repr(err), acc.size, u4_ed))
            if an.convergence_h_x is not None and h_x == an.convergence_h_x:
                for s_val, u4_run in analysis.u4_convergence(acc, an.convergence_s_grid or [acc.size]):
                    convergence_rows.append((label, s_val, repr(u4_run)))
        curves[label] = points
    with open(out / "binder.csv", "w") as fh:
        fh.write("h_x,size,u4,error,s,u4_ed\n")
        for row in csv_rows:
            fh.write(",".join(str(v) for v in row) + "\n")
    if convergence_rows:
        with open(out / "convergence.csv", "w") as fh:
            fh.write("size,s,u4\n")
            for row in convergence_rows:
                fh.write(",".join(str(v) for v in row) + "\n")
    labels = list(curves)
    pairs = []
    failures = []
    for i in range(len(labels)):
        for j_ in range(i + 1, len(labels)):
            a_lbl, b_lbl = labels[i], labels[j_]
            entry = {"sizes": [a_lbl, b_lbl]}
            try:
                h_c, err = analysis.find_crossing(curves[a_lbl], curves[b_lbl], an.resamples, rng)
                entry.update({"h_x_c": h_c, "error": err})
            except NoCrossingError:
                entry.update({"h_x_c": None, "error": None, "status": "no-crossing"})
                failures.append((a_lbl, b_lbl))
            except AmbiguousCrossingError as exc:
                entry.update({"h_x_c": None, "error": None, "status": "ambiguous", "candidates": exc.candidates})
                failures.append((a_lbl, b_lbl))
            pairs.append(entry)
    _write_json(
        out / "crossing.json",
        {
            "schema": SCHEMA_CROSSING,
            "config": cfg.to_dict(),
            "beta": beta,
            "pairs": pairs,
        },
    )
    if failures and len(failures) == len(pairs):
        raise NoCrossingError(f"no crossing found for any size pair on grid {an.h_x_grid}")
    return out


def cmd_fidelity(cfg: RunConfig, tau: float | None, bits: int | None, basis: str) -> Path:
    out = resolve_output_dir(cfg)
    ham = cfg.model.hamiltonian()
    n = ham.n_qubits
    if bits is None:
        rng = np.random.default_rng(cfg.sampling.master_seed)
        bits = int(rng.integers(0, 1 << n, dtype=np.uint64))
    if tau is None:
        tau = cfg.sampling.beta[0] / 2.0
    reference = Cps(n, bits, basis)
    rows, diags = ed.fidelity_trace(reference, ham, cfg.avqite.params(), tau, with_diagnostics=True)
    with open(out / "fidelity.csv", "w") as fh:
        fh.write("tau,infidelity,energy_error\n")
        for r in rows:
            fh.write(",".join(repr(float(v)) for v in r) + "\n")
    with open(out / "trace.csv", "w") as fh:
        avqite.diagnostics_to_csv(diags, fh)
    _write_json(
        out / "fidelity_summary.json",
        {
            "schema": SCHEMA_FIDELITY,
            "config": cfg.to_dict(),
            "reference_bits": bits,
            "reference_basis": basis,
            "tau_final": tau,
            "final_infidelity": rows[-1][1],
            "max_infidelity": max(r[1] for r in rows),
            "max_energy_error": max(r[2] for r in rows),
        },
    )
    return out


# --- argument parsing ---------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="parallel walker processes")
    p.add_argument("--beta", type=float, action="append", help="inverse temperature (repeatable)")
    p.add_argument("--sw", type=int, help="number of independent walks")
    p.add_argument("--s0", type=int, help="samples per walk")
    p.add_argument("--burn-in", type=int, dest="burn_in", help="discarded steps per walk")
    p.add_argument("--kind", choices=[model.CHAIN_1D, model.RECTANGLE_2D], help="lattice kind")
    p.add_argument("--lx", type=int, help="lattice extent in x")
    p.add_argument("--ly", type=int, help="lattice extent in y")
    p.add_argument("--hx", type=float, help="transverse field")
    p.add_argument("--hz", type=float, help="longitudinal field")
    p.add_argument("-v", "--verbose", action="store_true")


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.out is not None:
        cfg.output.directory = args.out
    if args.seed is not None:
        cfg.sampling.master_seed = args.seed
    if args.beta:
        cfg.sampling.beta = list(args.beta)
    if args.sw is not None:
        cfg.sampling.s_w = args.sw
    if args.s0 is not None:
        cfg.sampling.s_0 = args.s0
    if args.burn_in is not None:
        cfg.sampling.burn_in = args.burn_in
    if args.kind is not None:
        cfg.model.kind = args.kind
    if args.lx is not None:
        cfg.model.lx = args.lx
    if args.ly is not None:
        cfg.model.ly = args.ly
    if args.hx is not None:
        cfg.model.h_x = args.hx
    if args.hz is not None:
        cfg.model.h_z = args.hz
    cfg.validate()
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avqmetts", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "ed", "binder"):
        _add_common(sub.add_parser(name))
    fid = sub.add_parser("fidelity")
    _add_common(fid)
    fid.add_argument("--tau", type=float, help="final imaginary time (default beta/2)")
    fid.add_argument("--bits", type=int, help="reference bitstring (default seeded random)")
    fid.add_argument("--basis", choices=[Z_BASIS, X_BASIS], default=Z_BASIS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "run":
            out = cmd_run(cfg, args.workers)
        elif args.command == "ed":
            out = cmd_ed(cfg)
        elif args.command == "binder":
            out = cmd_binder(cfg, args.workers)
        else:
            out = cmd_fidelity(cfg, args.tau, args.bits, args.basis)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NoCrossingError as exc:
        print(f"no crossing: {exc}", file=sys.stderr)
        return 4
    except (NumericalError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

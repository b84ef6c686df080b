"""Thermal sampling by a Markov chain of imaginary-time-evolved product states.

One thermal step: evolve the walker's current CPS to tau = beta/2,
measure the requested observables on the resulting state, then collapse
it projectively to a new CPS.  Collapse bases strictly alternate between
X and Z on consecutive steps to shorten the chain's autocorrelation.
Walkers are independent and deterministic given (master_seed, id), so an
ensemble is reproducible at any parallelism degree.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis, avqite
from .errors import NumericalError
from .pauli import WeightedPauliSum
from .state import Cps, StateVector, X_BASIS, Z_BASIS

logger = logging.getLogger(__name__)

DEBUG_CHECKS = os.environ.get("AVQMETTS_DEBUG", "").strip().lower() in {"1", "true", "yes", "on"}

KNOWN_OBSERVABLES = ("energy", "m2", "m4")


def _other_basis(basis: str) -> str:
    return Z_BASIS if basis == X_BASIS else X_BASIS


@dataclass
class Walker:
    """One independent Markov chain with its own seeded random stream."""

    id: int
    current_cps: Cps
    next_collapse_basis: str
    rng: np.random.Generator
    step_count: int = 0

    @classmethod
    def spawn(cls, master_seed: int, walker_id: int, n_qubits: int, first_collapse: str = X_BASIS) -> "Walker":
        rng = np.random.default_rng([int(master_seed), int(walker_id)])
        bits = int(rng.integers(0, 1 << n_qubits, dtype=np.uint64))
        return cls(walker_id, Cps(n_qubits, bits, Z_BASIS), first_collapse, rng)


@dataclass
class SampleRecord:
    walker_id: int
    step_index: int
    origin_basis: str
    observables: dict[str, float]
    n_theta: int
    n_cx: int


@dataclass
class EnsembleAccumulator:
    """All post-burn-in sample records, ordered by (walker_id, step_index)."""

    records: list[SampleRecord]
    s_w: int
    s_0: int
    burn_in: int

    @property
    def size(self) -> int:
        return len(self.records)

    def values(self, name: str) -> np.ndarray:
        return np.array([r.observables[name] for r in self.records], dtype=np.float64)

    def mean(self, name: str) -> float:
        if not self.records:
            raise ValueError("empty accumulator")
        return float(self.values(name).mean())

    def stderr(self, name: str) -> float:
        """Ensemble standard error, (1/S) * sqrt(sum of squared deviations).

        This is the sample-mean error sigma/sqrt(S) written with the
        population deviation sum, not the Bessel-corrected s/sqrt(S).
        """
        if len(self.records) < 2:
            raise ValueError("need at least two records for a standard error")
        v = self.values(name)
        return float(np.sqrt(np.sum((v - v.mean()) ** 2)) / len(v))

    def cnot_counts(self, basis: str | None = None) -> np.ndarray:
        recs = self.records if basis is None else [r for r in self.records if r.origin_basis == basis]
        return np.array([r.n_cx for r in recs], dtype=np.float64)


@dataclass
class CnotStats:
    """Population mean/std of the per-sample CNOT count, split by origin basis."""

    mean: float
    sigma: float
    by_basis: dict[str, tuple[float, float]] = field(default_factory=dict)


def cnot_stats(acc: EnsembleAccumulator) -> CnotStats:
    def pop_stats(v: np.ndarray) -> tuple[float, float]:
        if v.size == 0:
            return float("nan"), float("nan")
        return float(v.mean()), float(np.sqrt(np.mean((v - v.mean()) ** 2)))

    mean, sigma = pop_stats(acc.cnot_counts())
    by_basis = {b: pop_stats(acc.cnot_counts(b)) for b in (Z_BASIS, X_BASIS)}
    return CnotStats(mean, sigma, by_basis)


def measure_observables(sv: StateVector, ham: WeightedPauliSum, names) -> dict[str, float]:
    out: dict[str, float] = {}
    moments = None
    for name in names:
        if name == "energy":
            out[name] = sv.expectation(ham)
        elif name in ("m2", "m4"):
            if moments is None:
                moments = analysis.magnetization_moments(sv)
            out[name] = moments[0] if name == "m2" else moments[1]
        else:
            raise ValueError(f"unknown observable {name!r}; known: {KNOWN_OBSERVABLES}")
    return out


def thermal_step(
    walker: Walker,
    ham: WeightedPauliSum,
    beta: float,
    params: avqite.AvqiteParams,
    observables=("energy",),
    pool=None,
) -> SampleRecord:
    """Evolve, measure, collapse; mutates the walker and returns the sample."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    ansatz, sv, _ = avqite.evolve(walker.current_cps, ham, beta / 2.0, params, pool=pool)
    if DEBUG_CHECKS:
        sv.assert_real()
    record = SampleRecord(
        walker_id=walker.id,
        step_index=walker.step_count,
        origin_basis=walker.current_cps.basis,
        observables=measure_observables(sv, ham, observables),
        n_theta=ansatz.n_params,
        n_cx=ansatz.count_cnots(),
    )
    new_cps, _prob = sv.collapse(walker.next_collapse_basis, walker.rng)
    walker.current_cps = new_cps
    walker.next_collapse_basis = _other_basis(walker.next_collapse_basis)
    walker.step_count += 1
    return record


def run_walk(
    walker: Walker,
    ham: WeightedPauliSum,
    beta: float,
    params: avqite.AvqiteParams,
    s_0: int,
    burn_in: int,
    observables=("energy",),
    pool=None,
) -> list[SampleRecord]:
    """Execute burn_in + s_0 thermal steps and return the last s_0 records."""
    if s_0 < 1:
        raise ValueError("s_0 must be at least 1")
    records = []
    for step in range(burn_in + s_0):
        rec = thermal_step(walker, ham, beta, params, observables, pool=pool)
        if step >= burn_in:
            records.append(rec)
    return records


def _walk_task(args) -> list[SampleRecord]:
    (ham, beta, params, s_0, burn_in, observables, master_seed, walker_id, first_collapse, pool) = args
    walker = Walker.spawn(master_seed, walker_id, ham.n_qubits, first_collapse)
    return run_walk(walker, ham, beta, params, s_0, burn_in, observables, pool=pool)


def run_ensemble(
    ham: WeightedPauliSum,
    beta: float,
    params: avqite.AvqiteParams,
    s_w: int,
    s_0: int,
    burn_in: int = 10,
    master_seed: int = 0,
    observables=("energy",),
    workers: int = 1,
    first_collapse: str = X_BASIS,
    pool=None,
) -> EnsembleAccumulator:
    """Run s_w independent walks (optionally across processes) and merge in walker order.

    The output is bit-identical for any worker count: every walker's
    stream is derived from (master_seed, walker_id) and aggregation is
    a deterministic ordered merge.
    """
    if s_w < 1:
        raise ValueError("s_w must be at least 1")
    if pool is None:
        from .model import build_pool

        pool = build_pool(ham.n_qubits)
    tasks = [
        (ham, beta, params, s_0, burn_in, tuple(observables), master_seed, wid, first_collapse, pool)
        for wid in range(s_w)
    ]
    per_walker: list[list[SampleRecord]] = [None] * s_w  # type: ignore[list-item]
    if workers <= 1 or s_w == 1:
        for wid, task in enumerate(tasks):
            per_walker[wid] = _walk_task(task)
    else:
        with ProcessPoolExecutor(max_workers=min(workers, s_w)) as pool_exec:
            futures = {pool_exec.submit(_walk_task, task): wid for wid, task in enumerate(tasks)}
            for fut, wid in futures.items():
                try:
                    per_walker[wid] = fut.result()
                except Exception as exc:
                    raise NumericalError(
                        f"walker {wid} (master_seed={master_seed}) failed: {exc}"
                    ) from exc
    records = [rec for walk in per_walker for rec in walk]
    records.sort(key=lambda r: (r.walker_id, r.step_index))
    return EnsembleAccumulator(records, s_w=s_w, s_0=s_0, burn_in=burn_in)


def records_to_csv(records, observable_names, fh, extra: dict | None = None) -> None:
    """One CSV row per sample; float cells use repr so reruns are byte-identical."""
    extra = extra or {}
    writer = csv.writer(fh, lineterminator="\n")
    header = list(extra) + ["walker_id", "step_index", "origin_basis", "n_theta", "n_cx"] + list(observable_names)
    writer.writerow(header)
    for r in records:
        row = [_cell(v) for v in extra.values()]
        row += [r.walker_id, r.step_index, r.origin_basis, r.n_theta, r.n_cx]
        row += [_cell(r.observables[name]) for name in observable_names]
        writer.writerow(row)


def _cell(v):
    return repr(float(v)) if isinstance(v, float) else v

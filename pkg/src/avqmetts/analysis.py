"""Physics post-processing: magnetization moments, fourth-order Binder
cumulant with bootstrap errors, and crossing-based critical-field extraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AmbiguousCrossingError, NoCrossingError
from .state import StateVector

U4_MAX = 2.0 / 3.0


@lru_cache(maxsize=None)
def magnetization_per_bitstring(n_qubits: int) -> np.ndarray:
    """m(b) = (N - 2*popcount(b)) / (2N): spin-1/2 average magnetization, Z-diagonal."""
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    m = (n_qubits - 2.0 * np.bitwise_count(idx).astype(np.float64)) / (2.0 * n_qubits)
    m.setflags(write=False)
    return m


def magnetization_moments(sv: StateVector) -> tuple[float, float]:
    """(<m^2>, <m^4>) of a state; m is Z-diagonal so a probability pass suffices."""
    probs = np.abs(sv.amps) ** 2
    m2_vals = magnetization_per_bitstring(sv.n_qubits) ** 2
    return float(probs @ m2_vals), float(probs @ m2_vals**2)


def binder_u4(mean_m2: float, mean_m4: float) -> float:
    """U4 = 1 - <m^4> / (3 <m^2>^2), a ratio of ensemble means."""
    if mean_m2 <= 0:
        raise ValueError("mean m^2 must be positive")
    u4 = 1.0 - mean_m4 / (3.0 * mean_m2**2)
    if u4 > U4_MAX + 1e-9:
        raise ValueError(f"U4 = {u4} exceeds the delta-distribution bound 2/3")
    return u4


def binder_u4_from_records(acc) -> float:
    """Binder cumulant of an ensemble accumulator carrying m2/m4 observables."""
    return binder_u4(acc.mean("m2"), acc.mean("m4"))


def binder_error(acc, resamples: int = 1000, rng: np.random.Generator | None = None) -> float:
    """Bootstrap standard deviation of U4 over the sample records."""
    if resamples < 100:
        raise ValueError("need at least 100 bootstrap resamples")
    m2 = acc.values("m2")
    m4 = acc.values("m4")
    if len(m2) < 2:
        raise ValueError("need at least two records to bootstrap")
    rng = rng or np.random.default_rng(0)
    n = len(m2)
    draws = np.empty(resamples)
    for k in range(resamples):
        pick = rng.integers(0, n, size=n)
        draws[k] = 1.0 - m4[pick].mean() / (3.0 * m2[pick].mean() ** 2)
    return float(draws.std())


def u4_convergence(acc, s_grid) -> list[tuple[int, float]]:
    """Running U4 over the first s records, for each requested ensemble size."""
    m2 = acc.values("m2")
    m4 = acc.values("m4")
    out = []
    for s in s_grid:
        s = int(min(s, len(m2)))
        out.append((s, binder_u4(float(m2[:s].mean()), float(m4[:s].mean()))))
    return out


@dataclass(frozen=True)
class BinderPoint:
    """U4 at one transverse-field value, keyed by lattice-size label."""

    h_x: float
    u4_by_size: dict[str, tuple[float, float]]
    n_samples: int


def _curve(points: list[BinderPoint]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    labels = {label for p in points for label in p.u4_by_size}
    if len(labels) != 1:
        raise ValueError(f"points must carry exactly one size label, got {sorted(labels)}")
    label = labels.pop()
    h = np.array([p.h_x for p in points])
    order = np.argsort(h)
    u4 = np.array([points[i].u4_by_size[label][0] for i in order])
    err = np.array([points[i].u4_by_size[label][1] for i in order])
    return h[order], u4, err


def _interp_roots(h: np.ndarray, d: np.ndarray) -> list[float]:
    roots = []
    for i in range(len(h) - 1):
        if d[i] == 0.0:
            roots.append(float(h[i]))
        elif d[i] * d[i + 1] < 0.0:
            roots.append(float(h[i] + (h[i + 1] - h[i]) * d[i] / (d[i] - d[i + 1])))
    if len(d) and d[-1] == 0.0:
        roots.append(float(h[-1]))
    return roots


def find_crossing(
    points_a: list[BinderPoint],
    points_b: list[BinderPoint],
    resamples: int = 1000,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Critical field where the two sizes' Binder curves cross.

    Locates the sign change of U4(b) - U4(a) on the shared grid and
    interpolates linearly; the error is the standard deviation of the
    crossing under Gaussian resampling of both curves by their errors.
    """
    h_a, u_a, e_a = _curve(points_a)
    h_b, u_b, e_b = _curve(points_b)
    if len(h_a) != len(h_b) or not np.allclose(h_a, h_b):
        raise ValueError("curves must share the same h_x grid")
    roots = _interp_roots(h_a, u_b - u_a)
    if not roots:
        raise NoCrossingError(f"no Binder crossing on h_x grid {h_a.tolist()}")
    if len(roots) > 1:
        raise AmbiguousCrossingError(roots)
    rng = rng or np.random.default_rng(0)
    draws = []
    for _ in range(resamples):
        d = (u_b + rng.normal(size=len(h_a)) * e_b) - (u_a + rng.normal(size=len(h_a)) * e_a)
        r = _interp_roots(h_a, d)
        if len(r) == 1:
            draws.append(r[0])
        elif len(r) > 1:
            # perturbed curve wiggled through zero more than once; keep the
            # root nearest the central crossing
            draws.append(min(r, key=lambda v: abs(v - roots[0])))
    error = float(np.std(draws)) if draws else float("nan")
    return roots[0], error

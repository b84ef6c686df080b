"""Exact-diagonalization oracle: dense spectra, exact thermal averages,
exact imaginary-time propagation of product states, and fidelity
references for the variational evolver.

Everything here is dense and O(4^N) in memory or worse; the qubit cap
(default 14) keeps it desk-scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import avqite
from .errors import NumericalError
from .pauli import WeightedPauliSum
from .state import Cps, StateVector, cps_amplitudes

DEFAULT_QUBIT_CAP = 14


def _term_action(idx: np.ndarray, z: int, y: int, want_complex: bool):
    """Per-basis-state sign array and scalar i^y phase of one Pauli term."""
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & z) & 1).astype(np.float64)
    phase = (1j) ** int(y % 4)
    return signs, (phase if want_complex else phase.real)


def to_dense(op: WeightedPauliSum) -> np.ndarray:
    """Dense matrix of a weighted Pauli sum; real float64 when every term has even Y count."""
    dim = 1 << op.n_qubits
    coeffs, xs, zs, ys = op.arrays()
    want_complex = bool(np.any(ys % 2))
    mat = np.zeros((dim, dim), dtype=np.complex128 if want_complex else np.float64)
    idx = np.arange(dim, dtype=np.int64)
    for c, x, z, y in zip(coeffs, xs, zs, ys):
        signs, phase = _term_action(idx, z, y, want_complex)
        mat[idx ^ x, idx] += (c * phase) * signs
    return mat


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition: ascending eigenvalues, orthonormal column eigenvectors."""

    n_qubits: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def gap_above_ground_pair(self, degeneracy_tol: float = 1e-6) -> float:
        """Energy of the first level above the (possibly quasi-degenerate) ground manifold."""
        e = self.eigenvalues
        k = 1
        while k < len(e) and e[k] - e[0] <= degeneracy_tol:
            k += 1
        return float(e[k] - e[0])


def diagonalize(op: WeightedPauliSum, qubit_cap: int = DEFAULT_QUBIT_CAP) -> Spectrum:
    if op.n_qubits > qubit_cap:
        raise ValueError(f"{op.n_qubits} qubits exceeds the dense-ED cap of {qubit_cap}")
    vals, vecs = np.linalg.eigh(to_dense(op))
    return Spectrum(op.n_qubits, vals, vecs)


def _boltzmann_weights(spec: Spectrum, beta: float) -> np.ndarray:
    # ground-energy shift keeps exp() finite at large beta
    return np.exp(-beta * (spec.eigenvalues - spec.eigenvalues[0]))


def eigenbasis_diagonal(spec: Spectrum, op: WeightedPauliSum) -> np.ndarray:
    """<n|O|n> for every eigenstate, without forming the dense O."""
    coeffs, xs, zs, ys = op.arrays()
    vecs = spec.eigenvectors
    idx = np.arange(vecs.shape[0], dtype=np.int64)
    want_complex = bool(np.any(ys % 2)) or np.iscomplexobj(vecs)
    ov = np.zeros(vecs.shape, dtype=np.complex128 if want_complex else np.float64)
    for c, x, z, y in zip(coeffs, xs, zs, ys):
        signs, phase = _term_action(idx, z, y, want_complex)
        ov[idx ^ x, :] += ((c * phase) * signs)[:, None] * vecs
    return np.real(np.einsum("in,in->n", vecs.conj(), ov))


def thermal_average(spec: Spectrum, op: WeightedPauliSum, beta: float) -> float:
    """Canonical-ensemble average of O at inverse temperature beta."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    w = _boltzmann_weights(spec, beta)
    return float(np.dot(w, eigenbasis_diagonal(spec, op)) / w.sum())


def thermal_average_zdiag(spec: Spectrum, diag_values: np.ndarray, beta: float) -> float:
    """Thermal average of an observable diagonal in the Z basis, given its per-bitstring values."""
    w = _boltzmann_weights(spec, beta)
    per_level = (np.abs(spec.eigenvectors) ** 2).T @ np.asarray(diag_values, dtype=np.float64)
    return float(np.dot(w, per_level) / w.sum())


def thermal_energy(spec: Spectrum, beta: float) -> float:
    w = _boltzmann_weights(spec, beta)
    return float(np.dot(w, spec.eigenvalues) / w.sum())


def metts_weights(spec: Spectrum, basis: str, beta: float) -> np.ndarray:
    """P_i = <i|e^{-beta*H}|i> for every CPS bitstring of one basis (unnormalized)."""
    w = _boltzmann_weights(spec, beta) * float(np.exp(-beta * spec.eigenvalues[0]))
    if basis == "Z":
        overlaps2 = np.abs(spec.eigenvectors) ** 2
    else:
        rotated = np.empty_like(spec.eigenvectors)
        dim = spec.eigenvectors.shape[0]
        for i in range(dim):
            cps = Cps(spec.n_qubits, i, "X")
            rotated[:, i] = cps_amplitudes(cps, dtype=spec.eigenvectors.dtype)
        overlaps2 = np.abs(rotated.T @ spec.eigenvectors) ** 2
    return overlaps2 @ w


def exact_metts(spec: Spectrum, cps: Cps, beta: float) -> tuple[StateVector, float]:
    """Normalized e^{-beta*H/2}|cps> and its weight P = <cps|e^{-beta*H}|cps>."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    c = spec.eigenvectors.conj().T @ cps_amplitudes(cps, dtype=spec.eigenvectors.dtype)
    shifted = c * np.exp(-0.5 * beta * (spec.eigenvalues - spec.eigenvalues[0]))
    nrm2 = float(np.vdot(shifted, shifted).real)
    amps = spec.eigenvectors @ (shifted / np.sqrt(nrm2))
    weight = nrm2 * float(np.exp(-beta * spec.eigenvalues[0]))
    return StateVector(cps.n_qubits, amps), weight


def exact_trajectory(spec: Spectrum, cps: Cps, taus: np.ndarray) -> np.ndarray:
    """Normalized exact imaginary-time states at every tau, as columns."""
    c = spec.eigenvectors.conj().T @ cps_amplitudes(cps, dtype=spec.eigenvectors.dtype)
    cols = c[:, None] * np.exp(-np.outer(spec.eigenvalues - spec.eigenvalues[0], np.asarray(taus)))
    cols /= np.linalg.norm(cols, axis=0)
    return spec.eigenvectors @ cols


def fidelity_trace(
    reference: Cps,
    ham: WeightedPauliSum,
    params: "avqite.AvqiteParams",
    tau_final: float,
    pool=None,
    qubit_cap: int = DEFAULT_QUBIT_CAP,
    with_diagnostics: bool = False,
):
    """Run the variational evolver against the exact propagator on a shared tau grid.

    Returns one (tau, infidelity, |energy error|) row per grid point,
    including tau = 0.  Also asserts that the exact energy never
    increases along the imaginary-time path.
    """
    spec = diagonalize(ham, qubit_cap=qubit_cap)
    collected: list[tuple[float, np.ndarray]] = []

    def on_step(tau: float, sv: StateVector):
        collected.append((tau, sv.amps.copy()))

    _, _, diags = avqite.evolve(reference, ham, tau_final, params, pool=pool, on_step=on_step)
    taus = np.array([t for t, _ in collected])
    exact_cols = exact_trajectory(spec, reference, taus)
    rows = []
    prev_exact_e = np.inf
    for k, (tau, amps) in enumerate(collected):
        exact = exact_cols[:, k]
        infid = max(0.0, 1.0 - float(np.abs(np.vdot(exact, amps)) ** 2))
        coeff = spec.eigenvectors.conj().T @ exact
        exact_e = float(np.real(np.vdot(coeff, spec.eigenvalues * coeff)))
        if exact_e > prev_exact_e + 1e-9:
            raise NumericalError("exact imaginary-time energy increased along the path")
        prev_exact_e = exact_e
        rows.append((float(tau), infid, abs(diags[k].energy - exact_e)))
    if with_diagnostics:
        return rows, diags
    return rows

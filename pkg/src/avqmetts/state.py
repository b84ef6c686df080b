"""Dense statevector engine: CPS preparation, Pauli rotations, expectation
values, inner products, and projective collapse in the Z or X basis.

Amplitudes are stored as complex128 even though the production rotation
pool keeps them real; realness is an assertion, not a storage choice, so
the engine stays usable with general generators.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NumericalError
from .pauli import PauliString, WeightedPauliSum

logger = logging.getLogger(__name__)

NORM_WARN = 1e-10   # renormalize-and-log threshold
NORM_ABORT = 1e-6   # drift beyond this aborts the run
IMAG_ABORT = 1e-8   # imaginary expectation residual signalling a phase bug

Z_BASIS = "Z"
X_BASIS = "X"


@dataclass(frozen=True)
class Cps:
    """Classical product state: bitstring in the Z basis, or its full-Hadamard rotation (X)."""

    n_qubits: int
    bits: int
    basis: str = Z_BASIS

    def __post_init__(self):
        if self.basis not in (Z_BASIS, X_BASIS):
            raise ValueError(f"basis must be 'Z' or 'X', got {self.basis!r}")
        if not 0 <= self.bits < (1 << self.n_qubits):
            raise ValueError(f"bits {self.bits} out of range for {self.n_qubits} qubits")


class StateVector:
    """2^N complex amplitudes with qubit 0 on the least significant index bit."""

    __slots__ = ("n_qubits", "amps")

    def __init__(self, n_qubits: int, amps: np.ndarray):
        amps = np.asarray(amps, dtype=np.complex128)
        if amps.shape != (1 << n_qubits,):
            raise ValueError(f"expected {1 << n_qubits} amplitudes, got shape {amps.shape}")
        self.n_qubits = n_qubits
        self.amps = amps

    @classmethod
    def from_cps(cls, cps: Cps) -> "StateVector":
        return cls(cps.n_qubits, cps_amplitudes(cps))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amps.copy())

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def maintain_norm(self) -> None:
        """Renormalize-and-log on small drift; abort on drift beyond 1e-6."""
        drift = abs(self.norm() - 1.0)
        if drift > NORM_ABORT:
            raise NumericalError(f"statevector norm drifted by {drift:.3e}")
        if drift > NORM_WARN:
            logger.info("renormalizing statevector (drift %.3e)", drift)
            self.amps /= self.norm()

    def apply_rotation(self, generator: PauliString, theta: float) -> "StateVector":
        """In place: exp(-i*theta*A)|s> = cos(theta)|s> - i sin(theta) A|s>. Returns self."""
        if generator.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        kernels.rotate(self.amps, generator.x_mask, generator.z_mask, generator.y_count, theta)
        return self

    def expectation(self, op: WeightedPauliSum) -> float:
        """<s|O|s> for Hermitian O; raises if the imaginary residual exceeds 1e-8."""
        if op.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        coeffs, xs, zs, ys = op.arrays()
        val = complex(np.vdot(self.amps, kernels.sum_apply(self.amps, coeffs, xs, zs, ys)))
        if abs(val.imag) > IMAG_ABORT:
            raise NumericalError(f"expectation value has imaginary residual {val.imag:.3e}")
        return val.real

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit count mismatch")
        return complex(np.vdot(self.amps, other.amps))

    def probabilities(self, basis: str = Z_BASIS) -> np.ndarray:
        """Measurement probabilities in the given product basis."""
        if basis == Z_BASIS:
            work = self.amps
        elif basis == X_BASIS:
            work = self.amps.copy()
            kernels.hadamard_all(work)
        else:
            raise ValueError(f"unknown basis {basis!r}")
        return np.abs(work) ** 2

    def collapse(self, basis: str, rng: np.random.Generator) -> tuple[Cps, float]:
        """Sample a projective measurement of every qubit in the given basis.

        Non-destructive: returns the sampled CPS and its probability.
        """
        probs = self.probabilities(basis)
        total = probs.sum()
        if abs(total - 1.0) > 1e-8:
            raise NumericalError(f"collapse probabilities sum to {total!r}")
        draw = rng.random() * total
        bits = int(min(np.searchsorted(np.cumsum(probs), draw, side="right"), self.dim - 1))
        return Cps(self.n_qubits, bits, basis), float(probs[bits])

    def assert_real(self, tol: float = 1e-10) -> None:
        """Debug check for the real-amplitude invariant of odd-y rotation pools."""
        worst = float(np.max(np.abs(self.amps.imag)))
        if worst > tol:
            raise NumericalError(f"amplitudes developed imaginary parts up to {worst:.3e}")


def cps_amplitudes(cps: Cps, dtype=np.complex128) -> np.ndarray:
    """Raw amplitude array of a CPS (real-valued for both bases)."""
    dim = 1 << cps.n_qubits
    amps = np.zeros(dim, dtype=dtype)
    amps[cps.bits] = 1.0
    if cps.basis == X_BASIS:
        kernels.hadamard_all(amps)
    return amps


def prepare_cps(cps: Cps) -> StateVector:
    return StateVector.from_cps(cps)


def dump_amplitudes(sv: StateVector, fh) -> None:
    """Debug dump: little-endian (real, imag) float64 pairs, index-major.

    Not part of the stable API.
    """
    inter = np.empty(2 * sv.dim, dtype="<f8")
    inter[0::2] = sv.amps.real
    inter[1::2] = sv.amps.imag
    fh.write(inter.tobytes())


def load_amplitudes(n_qubits: int, fh) -> StateVector:
    raw = np.frombuffer(fh.read(16 * (1 << n_qubits)), dtype="<f8")
    return StateVector(n_qubits, raw[0::2] + 1j * raw[1::2])

"""Finite-temperature spin-model sampling: thermal product states evolved in
imaginary time by an adaptive variational statevector engine, with an
exact-diagonalization oracle for validation.
"""

from .avqite import Ansatz, AvqiteParams, StepDiagnostics, evolve
from .model import IsingParams, Lattice, build_hamiltonian, build_pool
from .pauli import PauliString, WeightedPauliSum
from .state import Cps, StateVector, prepare_cps

__version__ = "0.1.0"

__all__ = [
    "Ansatz",
    "AvqiteParams",
    "Cps",
    "IsingParams",
    "Lattice",
    "PauliString",
    "StateVector",
    "StepDiagnostics",
    "WeightedPauliSum",
    "build_hamiltonian",
    "build_pool",
    "evolve",
    "prepare_cps",
    "__version__",
]

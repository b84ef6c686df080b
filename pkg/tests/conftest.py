"""Shared dense-matrix oracles, built independently of the package kernels."""

import numpy as np
import pytest

PAULI_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_pauli(p) -> np.ndarray:
    """Kronecker-product matrix of a Pauli string, qubit 0 on the least significant bit."""
    m = np.eye(1, dtype=complex)
    for q in range(p.n_qubits):
        m = np.kron(PAULI_MATS[p.letter(q)], m)
    return m


def dense_sum(op) -> np.ndarray:
    out = np.zeros((1 << op.n_qubits, 1 << op.n_qubits), dtype=complex)
    for c, p in op.terms:
        out += c * dense_pauli(p)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

"""Bitmask-encoded Pauli strings and real-weighted sums of them.

An N-qubit Pauli string is stored as two N-bit integers: bit j of
``x_mask`` is set iff qubit j carries X or Y, bit j of ``z_mask`` iff it
carries Z or Y.  Qubit j corresponds to bit j of a computational basis
index, so basis index 5 on three qubits is |101> = |1>_2 |0>_1 |1>_0.

Sign convention: a string with Y count k acts on a basis state as

    P |b> = i^k * (-1)^popcount(z_mask & b) * |b XOR x_mask>

which reproduces the standard matrices X=[[0,1],[1,0]],
Y=[[0,-i],[i,0]], Z=[[1,0],[0,-1]] under Kronecker products ordered so
that qubit 0 is the least significant index bit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_PHASES = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)  # i^k for k = 0..3

# per-letter (x, z) bits
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}

_TERM_RE = re.compile(r"^\s*([+-]?[\d.eE+-]+)\s*\*\s*(.+?)\s*$")
_FACTOR_RE = re.compile(r"^([IXYZ])(\d+)$")


def popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """A single N-qubit Pauli string in symplectic bitmask form."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask uses bits beyond n_qubits")

    @classmethod
    def from_letters(cls, n_qubits: int, letters: Iterable[tuple[int, str]]) -> "PauliString":
        """Build from (qubit index, letter) pairs; omitted qubits are identity."""
        x = z = 0
        seen = set()
        for q, letter in letters:
            if q in seen:
                raise ValueError(f"duplicate qubit index {q}")
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
            seen.add(q)
            try:
                bx, bz = _LETTER_BITS[letter.upper()]
            except KeyError:
                raise ValueError(f"unknown Pauli letter {letter!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(n_qubits, x, z)

    @classmethod
    def from_label(cls, n_qubits: int, label: str) -> "PauliString":
        """Parse the textual form, e.g. "Y0 Z3" or "I" for the identity."""
        label = label.strip()
        if label == "I":
            return cls(n_qubits)
        pairs = []
        for factor in label.split():
            m = _FACTOR_RE.match(factor)
            if m is None:
                raise ValueError(f"cannot parse Pauli factor {factor!r}")
            pairs.append((int(m.group(2)), m.group(1)))
        return cls.from_letters(n_qubits, pairs)

    def letter(self, qubit: int) -> str:
        bx = (self.x_mask >> qubit) & 1
        bz = (self.z_mask >> qubit) & 1
        return _BITS_LETTER[(bx, bz)]

    @property
    def y_count(self) -> int:
        return popcount(self.x_mask & self.z_mask)

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return popcount(self.x_mask | self.z_mask)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def apply_to_basis(self, b: int) -> tuple[int, complex]:
        """Return (b', phase) with P|b> = phase |b'>."""
        if not 0 <= b < (1 << self.n_qubits):
            raise ValueError(f"basis index {b} out of range")
        k = (self.y_count + 2 * popcount(self.z_mask & b)) % 4
        return b ^ self.x_mask, _PHASES[k]

    def commutes_with(self, other: "PauliString") -> bool:
        """Symplectic criterion: commute iff the crossed overlap count is even."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit count mismatch")
        cross = popcount(self.x_mask & other.z_mask) + popcount(self.z_mask & other.x_mask)
        return cross % 2 == 0

    def __str__(self) -> str:
        if self.is_identity:
            return "I"
        return " ".join(f"{self.letter(q)}{q}" for q in range(self.n_qubits) if (self.x_mask | self.z_mask) >> q & 1)

    def sort_key(self) -> tuple[int, int]:
        return (self.z_mask, self.x_mask)


class WeightedPauliSum:
    """Hermitian operator as a real-weighted sum of Pauli strings.

    Terms are normalized at construction: sorted by mask key, duplicates
    merged by summing coefficients, exact-zero terms dropped.  Equality
    is therefore canonical.
    """

    __slots__ = ("n_qubits", "terms", "_arrays")

    def __init__(self, n_qubits: int, terms: Iterable[tuple[float, PauliString]]):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        merged: dict[tuple[int, int], float] = {}
        for coeff, p in terms:
            if p.n_qubits != n_qubits:
                raise ValueError("term qubit count mismatch")
            key = (p.z_mask, p.x_mask)
            merged[key] = merged.get(key, 0.0) + float(coeff)
        self.n_qubits = n_qubits
        self.terms = tuple(
            (c, PauliString(n_qubits, x_mask=k[1], z_mask=k[0]))
            for k, c in sorted(merged.items())
            if c != 0.0
        )
        self._arrays = None

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Coefficients and masks as flat arrays (coeffs, x_masks, z_masks, y_counts)."""
        if self._arrays is None:
            coeffs = np.array([c for c, _ in self.terms], dtype=np.float64)
            xs = np.array([p.x_mask for _, p in self.terms], dtype=np.int64)
            zs = np.array([p.z_mask for _, p in self.terms], dtype=np.int64)
            ys = np.array([p.y_count for _, p in self.terms], dtype=np.int64)
            self._arrays = (coeffs, xs, zs, ys)
        return self._arrays

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedPauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_qubits, self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "\n".join(f"{c:+g} * {p}" for c, p in self.terms)

    @classmethod
    def from_text(cls, n_qubits: int, text: str) -> "WeightedPauliSum":
        """Parse the printed form back: one "coeff * factors" term per line."""
        terms = []
        for line in text.strip().splitlines():
            line = line.strip()
            if not line or line == "0":
                continue
            m = _TERM_RE.match(line)
            if m is None:
                raise ValueError(f"cannot parse term {line!r}")
            terms.append((float(m.group(1)), PauliString.from_label(n_qubits, m.group(2))))
        return cls(n_qubits, terms)


def pauli_strings_to_arrays(strings: Sequence[PauliString]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mask arrays (x, z, y_count) for a homogeneous list of Pauli strings."""
    xs = np.array([p.x_mask for p in strings], dtype=np.int64)
    zs = np.array([p.z_mask for p in strings], dtype=np.int64)
    ys = np.array([p.y_count for p in strings], dtype=np.int64)
    return xs, zs, ys

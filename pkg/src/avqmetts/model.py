"""Lattice geometry, Ising Hamiltonians, and the adaptive-ansatz operator pool."""

from __future__ import annotations

from dataclasses import dataclass, field

from .pauli import PauliString, WeightedPauliSum

CHAIN_1D = "chain_1d"
RECTANGLE_2D = "rectangle_2d"


@dataclass(frozen=True)
class Lattice:
    """Sites on a 1D ring/chain or a 2D rectangle, with a deduplicated edge set.

    Site indexing is row-major over (x, y): site = x + lx * y.
    """

    kind: str
    lx: int
    ly: int
    pbc: bool
    edges: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        if self.kind not in (CHAIN_1D, RECTANGLE_2D):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.lx < 1 or self.ly < 1:
            raise ValueError("lattice dimensions must be positive")
        if self.kind == CHAIN_1D and self.ly != 1:
            raise ValueError("chain_1d requires ly == 1")
        object.__setattr__(self, "edges", tuple(sorted(self._build_edges())))

    def _build_edges(self) -> set[tuple[int, int]]:
        # set-of-sorted-pairs merges the duplicate wraparound bonds of
        # degenerate PBC geometries (2-site ring, 2xL strips)
        edges: set[tuple[int, int]] = set()

        def add(a: int, b: int):
            if a != b:
                edges.add((min(a, b), max(a, b)))

        if self.kind == CHAIN_1D:
            for x in range(self.lx - 1):
                add(x, x + 1)
            if self.pbc and self.lx > 1:
                add(self.lx - 1, 0)
            return edges

        def site(x: int, y: int) -> int:
            return x + self.lx * y

        for y in range(self.ly):
            for x in range(self.lx):
                if x + 1 < self.lx:
                    add(site(x, y), site(x + 1, y))
                elif self.pbc:
                    add(site(x, y), site(0, y))
                if y + 1 < self.ly:
                    add(site(x, y), site(x, y + 1))
                elif self.pbc:
                    add(site(x, y), site(x, 0))
        return edges

    @property
    def n_sites(self) -> int:
        return self.lx * self.ly

    @classmethod
    def chain(cls, n_sites: int, pbc: bool = True) -> "Lattice":
        return cls(CHAIN_1D, n_sites, 1, pbc)

    @classmethod
    def rectangle(cls, lx: int, ly: int, pbc: bool = True) -> "Lattice":
        return cls(RECTANGLE_2D, lx, ly, pbc)

    @property
    def label(self) -> str:
        return f"{self.lx}" if self.kind == CHAIN_1D else f"{self.lx}x{self.ly}"


@dataclass(frozen=True)
class IsingParams:
    """Couplings of H = -J sum_<jk> Z_j Z_k - sum_j (h_x X_j + h_z Z_j)."""

    j: float = 1.0
    h_x: float = 0.0
    h_z: float = 0.0


def build_hamiltonian(lat: Lattice, p: IsingParams) -> WeightedPauliSum:
    n = lat.n_sites
    terms: list[tuple[float, PauliString]] = []
    for a, b in lat.edges:
        terms.append((-p.j, PauliString.from_letters(n, [(a, "Z"), (b, "Z")])))
    if p.h_x != 0.0:
        for q in range(n):
            terms.append((-p.h_x, PauliString.from_letters(n, [(q, "X")])))
    if p.h_z != 0.0:
        for q in range(n):
            terms.append((-p.h_z, PauliString.from_letters(n, [(q, "Z")])))
    return WeightedPauliSum(n, terms)


def build_pool(n_qubits: int) -> list[PauliString]:
    """Single-Y rotation generators: all Y_j, then Y_j Z_k / Z_j Y_k for j < k.

    Every element carries exactly one Y, so rotations keep real
    amplitudes real.  The listed order is the deterministic tie-break
    order for ansatz growth.  Size is n_qubits^2.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be positive")
    pool = [PauliString.from_letters(n_qubits, [(j, "Y")]) for j in range(n_qubits)]
    for j in range(n_qubits):
        for k in range(j + 1, n_qubits):
            pool.append(PauliString.from_letters(n_qubits, [(j, "Y"), (k, "Z")]))
            pool.append(PauliString.from_letters(n_qubits, [(j, "Z"), (k, "Y")]))
    return pool

import pytest

from avqmetts.model import IsingParams, Lattice, build_hamiltonian, build_pool
from avqmetts.pauli import PauliString


class TestLattice:
    def test_chain_pbc_edges(self):
        lat = Lattice.chain(4)
        assert lat.edges == ((0, 1), (0, 3), (1, 2), (2, 3))

    def test_chain_obc_edges(self):
        lat = Lattice.chain(4, pbc=False)
        assert lat.edges == ((0, 1), (1, 2), (2, 3))

    def test_two_site_ring_merges_wraparound(self):
        assert Lattice.chain(2).edges == ((0, 1),)

    def test_chain_edge_count(self):
        for n in range(3, 12):
            assert len(Lattice.chain(n).edges) == n

    def test_rectangle_edge_count(self):
        for lx in range(3, 6):
            for ly in range(3, 6):
                assert len(Lattice.rectangle(lx, ly).edges) == 2 * lx * ly

    def test_two_by_l_strip_merges_duplicates(self):
        lat = Lattice.rectangle(2, 3)
        # horizontal wraparound bonds coincide with the interior ones
        assert len(lat.edges) == len(set(lat.edges))
        assert all(a < b for a, b in lat.edges)

    def test_row_major_indexing(self):
        lat = Lattice.rectangle(3, 2)
        assert (0, 1) in lat.edges  # x-neighbors adjacent in index
        assert (0, 3) in lat.edges  # y-neighbor offset by lx

    def test_labels(self):
        assert Lattice.chain(9).label == "9"
        assert Lattice.rectangle(4, 3).label == "4x3"

    def test_invalid_kind(self):
        with pytest.raises(ValueError):
            Lattice("triangle", 3, 3, True)


class TestHamiltonian:
    def test_classical_ring(self):
        ham = build_hamiltonian(Lattice.chain(3), IsingParams(1.0, 0.0, 0.0))
        assert ham.n_terms == 3
        assert all(c == -1.0 for c, _ in ham.terms)
        assert all(p.weight == 2 and p.y_count == 0 for _, p in ham.terms)

    def test_term_count_mixed_field(self):
        ham = build_hamiltonian(Lattice.chain(4), IsingParams(1.0, 1.0, 0.5))
        assert ham.n_terms == 12

    def test_3x3_tfim(self):
        ham = build_hamiltonian(Lattice.rectangle(3, 3), IsingParams(1.0, 3.05, 0.0))
        zz = [t for t in ham.terms if t[1].weight == 2]
        x = [t for t in ham.terms if t[1].weight == 1]
        assert len(zz) == 18
        assert len(x) == 9
        assert all(c == -3.05 for c, _ in x)

    def test_traceless(self):
        for p in (IsingParams(1.0, 0.0, 0.0), IsingParams(1.0, 1.0, 0.5), IsingParams(2.0, 3.05, 1.525)):
            ham = build_hamiltonian(Lattice.chain(5), p)
            assert all(not t[1].is_identity for t in ham.terms)


class TestPool:
    def test_single_qubit(self):
        assert build_pool(1) == [PauliString.from_letters(1, [(0, "Y")])]

    def test_two_qubit_enumeration(self):
        pool = build_pool(2)
        expect = [
            PauliString.from_letters(2, [(0, "Y")]),
            PauliString.from_letters(2, [(1, "Y")]),
            PauliString.from_letters(2, [(0, "Y"), (1, "Z")]),
            PauliString.from_letters(2, [(0, "Z"), (1, "Y")]),
        ]
        assert pool == expect

    def test_size_is_n_squared(self):
        for n in (1, 2, 5, 14):
            assert len(build_pool(n)) == n * n

    def test_every_element_has_one_y(self):
        assert all(p.y_count == 1 for p in build_pool(6))

    def test_order_is_deterministic(self):
        assert build_pool(5) == build_pool(5)

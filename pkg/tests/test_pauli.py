import itertools

import numpy as np
import pytest

from avqmetts.pauli import PauliString, WeightedPauliSum

from conftest import dense_pauli


def all_strings(n):
    for letters in itertools.product("IXYZ", repeat=n):
        yield PauliString.from_letters(n, [(q, L) for q, L in enumerate(letters) if L != "I"])


class TestConstruction:
    def test_identity(self):
        p = PauliString.from_letters(2, [])
        assert (p.x_mask, p.z_mask) == (0, 0)
        assert p.is_identity

    def test_y_encoding(self):
        p = PauliString.from_letters(2, [(0, "Y")])
        assert (p.x_mask, p.z_mask) == (0b01, 0b01)

    def test_y_and_z(self):
        p = PauliString.from_letters(2, [(0, "Y"), (1, "Z")])
        assert (p.x_mask, p.z_mask) == (0b01, 0b11)

    def test_duplicate_qubit_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            PauliString.from_letters(2, [(0, "X"), (0, "Z")])

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            PauliString.from_letters(2, [(2, "X")])

    def test_mask_beyond_n_qubits_rejected(self):
        with pytest.raises(ValueError):
            PauliString(1, x_mask=0b10)

    def test_y_count(self):
        assert PauliString.from_letters(3, [(0, "Y"), (2, "Y")]).y_count == 2
        assert PauliString.from_letters(3, [(1, "X"), (2, "Z")]).y_count == 0

    def test_weight(self):
        assert PauliString.from_letters(3, [(0, "Y"), (2, "Z")]).weight == 2


class TestApply:
    def test_x_on_zero(self):
        p = PauliString.from_letters(1, [(0, "X")])
        assert p.apply_to_basis(0) == (1, 1.0 + 0.0j)

    def test_z_on_one(self):
        p = PauliString.from_letters(1, [(0, "Z")])
        assert p.apply_to_basis(1) == (1, -1.0 + 0.0j)

    def test_y_both(self):
        p = PauliString.from_letters(1, [(0, "Y")])
        assert p.apply_to_basis(0) == (1, 1.0j)
        assert p.apply_to_basis(1) == (0, -1.0j)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exhaustive_dense_agreement(self, n):
        dim = 1 << n
        for p in all_strings(n):
            mat = dense_pauli(p)
            for b in range(dim):
                b2, phase = p.apply_to_basis(b)
                col = np.zeros(dim, dtype=complex)
                col[b2] = phase
                assert np.allclose(mat[:, b], col, atol=1e-12)

    def test_double_apply_is_identity(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 7))
            p = PauliString(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
            b = int(rng.integers(0, 1 << n))
            b1, ph1 = p.apply_to_basis(b)
            b2, ph2 = p.apply_to_basis(b1)
            assert b2 == b
            assert ph1 * ph2 == 1.0 + 0.0j


class TestCommutes:
    def test_self_commutes(self):
        p = PauliString.from_letters(1, [(0, "X")])
        assert p.commutes_with(p)

    def test_x_z_anticommute(self):
        x = PauliString.from_letters(1, [(0, "X")])
        z = PauliString.from_letters(1, [(0, "Z")])
        assert not x.commutes_with(z)

    def test_yz_zy_commute(self):
        a = PauliString.from_letters(2, [(0, "Y"), (1, "Z")])
        b = PauliString.from_letters(2, [(0, "Z"), (1, "Y")])
        assert a.commutes_with(b)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            PauliString(1).commutes_with(PauliString(2))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exhaustive_dense_agreement(self, n):
        strings = list(all_strings(n))
        mats = [dense_pauli(p) for p in strings]
        for i, p in enumerate(strings):
            for j, q in enumerate(strings):
                comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                assert p.commutes_with(q) == (np.linalg.norm(comm) < 1e-12)


class TestWeightedSum:
    def test_duplicates_merge(self):
        z0 = PauliString.from_letters(2, [(0, "Z")])
        s = WeightedPauliSum(2, [(1.0, z0), (0.5, z0)])
        assert s.n_terms == 1
        assert s.terms[0][0] == 1.5

    def test_zero_terms_dropped(self):
        z0 = PauliString.from_letters(2, [(0, "Z")])
        x1 = PauliString.from_letters(2, [(1, "X")])
        s = WeightedPauliSum(2, [(1.0, z0), (-1.0, z0), (2.0, x1)])
        assert s.n_terms == 1

    def test_canonical_equality(self):
        z0 = PauliString.from_letters(2, [(0, "Z")])
        x1 = PauliString.from_letters(2, [(1, "X")])
        a = WeightedPauliSum(2, [(1.0, z0), (2.0, x1)])
        b = WeightedPauliSum(2, [(2.0, x1), (0.5, z0), (0.5, z0)])
        assert a == b

    def test_qubit_mismatch_rejected(self):
        with pytest.raises(ValueError):
            WeightedPauliSum(2, [(1.0, PauliString.from_letters(3, [(0, "Z")]))])


class TestTextForm:
    def test_string_form(self):
        p = PauliString.from_letters(4, [(0, "Y"), (3, "Z")])
        assert str(p) == "Y0 Z3"
        assert str(PauliString(2)) == "I"

    def test_pauli_round_trip(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 8))
            p = PauliString(n, int(rng.integers(0, 1 << n)), int(rng.integers(0, 1 << n)))
            assert PauliString.from_label(n, str(p)) == p

    def test_sum_round_trip(self):
        text = "+1.0 * Y0 Z3\n-0.25 * X1\n+0.5 * I"
        s = WeightedPauliSum.from_text(4, text)
        assert WeightedPauliSum.from_text(4, str(s)) == s
        assert s.n_terms == 3

    def test_bad_term_rejected(self):
        with pytest.raises(ValueError):
            WeightedPauliSum.from_text(2, "1.0 * Q5")

import numpy as np
import pytest
from scipy.linalg import expm

from avqmetts.errors import NumericalError
from avqmetts.model import IsingParams, Lattice, build_hamiltonian, build_pool
from avqmetts.pauli import PauliString, WeightedPauliSum
from avqmetts.state import Cps, StateVector, prepare_cps

from conftest import dense_pauli


class TestPrepare:
    def test_z_basis_delta(self):
        sv = prepare_cps(Cps(2, 0, "Z"))
        assert np.allclose(sv.amps, [1, 0, 0, 0])

    def test_plus_state(self):
        sv = prepare_cps(Cps(1, 0, "X"))
        assert np.allclose(sv.amps, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_minus_state(self):
        sv = prepare_cps(Cps(1, 1, "X"))
        assert np.allclose(sv.amps, [1 / np.sqrt(2), -1 / np.sqrt(2)])

    def test_x_basis_signs(self):
        bits = 0b101
        sv = prepare_cps(Cps(3, bits, "X"))
        for b in range(8):
            sign = (-1) ** bin(bits & b).count("1")
            assert np.isclose(sv.amps[b], sign / np.sqrt(8))

    def test_bad_basis_rejected(self):
        with pytest.raises(ValueError):
            Cps(1, 0, "Q")

    def test_bits_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            Cps(1, 2)


class TestRotation:
    def test_zero_angle_is_identity(self, rng):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        sv = StateVector(2, v.copy())
        sv.apply_rotation(PauliString.from_letters(2, [(0, "Y")]), 0.0)
        assert np.allclose(sv.amps, v)

    def test_y_rotation_on_zero(self):
        theta = 0.37
        sv = prepare_cps(Cps(1, 0))
        sv.apply_rotation(PauliString.from_letters(1, [(0, "Y")]), theta)
        assert np.allclose(sv.amps, [np.cos(theta), np.sin(theta)])

    def test_z_rotation_phase(self):
        sv = prepare_cps(Cps(1, 1))
        sv.apply_rotation(PauliString.from_letters(1, [(0, "Z")]), np.pi / 2)
        assert np.allclose(sv.amps, [0, 1j])

    def test_matches_dense_exponential(self, rng):
        for n in (1, 2, 3):
            dim = 1 << n
            for _ in range(15):
                p = PauliString(n, int(rng.integers(0, dim)), int(rng.integers(0, dim)))
                theta = float(rng.normal())
                v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
                v /= np.linalg.norm(v)
                sv = StateVector(n, v.copy())
                sv.apply_rotation(p, theta)
                expect = expm(-1j * theta * dense_pauli(p)) @ v
                assert np.max(np.abs(sv.amps - expect)) < 1e-12

    def test_norm_preserved_per_gate(self, rng):
        sv = prepare_cps(Cps(3, 5))
        for _ in range(50):
            p = PauliString(3, int(rng.integers(0, 8)), int(rng.integers(0, 8)))
            sv.apply_rotation(p, float(rng.normal()))
            assert abs(sv.norm() - 1.0) < 1e-12

    def test_round_trip_rotation(self, rng):
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        sv = StateVector(3, v.copy())
        p = PauliString.from_letters(3, [(0, "Y"), (2, "Z")])
        sv.apply_rotation(p, 0.83)
        sv.apply_rotation(p, -0.83)
        assert np.max(np.abs(sv.amps - v)) < 1e-12

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            prepare_cps(Cps(2, 0)).apply_rotation(PauliString(1, 1, 0), 0.1)


class TestExpectation:
    def test_z_on_zero(self):
        op = WeightedPauliSum(1, [(1.0, PauliString.from_letters(1, [(0, "Z")]))])
        assert prepare_cps(Cps(1, 0)).expectation(op) == pytest.approx(1.0)

    def test_x_on_plus(self):
        op = WeightedPauliSum(1, [(1.0, PauliString.from_letters(1, [(0, "X")]))])
        assert prepare_cps(Cps(1, 0, "X")).expectation(op) == pytest.approx(1.0)

    def test_tfim_on_all_up(self):
        ham = build_hamiltonian(Lattice.chain(4), IsingParams(1.0, 1.0, 0.0))
        assert prepare_cps(Cps(4, 0)).expectation(ham) == pytest.approx(-4.0)

    def test_matches_dense(self, rng):
        ham = build_hamiltonian(Lattice.chain(3), IsingParams(1.0, 0.7, 0.3))
        from conftest import dense_sum

        hd = dense_sum(ham)
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        sv = StateVector(3, v)
        assert sv.expectation(ham) == pytest.approx(np.real(np.vdot(v, hd @ v)), abs=1e-12)


class TestInner:
    def test_self_overlap(self, rng):
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        sv = StateVector(2, v)
        assert sv.inner(sv) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert prepare_cps(Cps(1, 0)).inner(prepare_cps(Cps(1, 1))) == pytest.approx(0.0)

    def test_zero_plus_overlap(self):
        assert prepare_cps(Cps(1, 0)).inner(prepare_cps(Cps(1, 0, "X"))) == pytest.approx(1 / np.sqrt(2))


class TestCollapse:
    def test_deterministic_z(self, rng):
        sv = prepare_cps(Cps(2, 0b01))
        cps, p = sv.collapse("Z", rng)
        assert (cps.bits, cps.basis) == (0b01, "Z")
        assert p == pytest.approx(1.0)

    def test_plus_in_z_is_fair(self, rng):
        sv = prepare_cps(Cps(1, 0, "X"))
        draws = [sv.collapse("Z", rng)[0].bits for _ in range(2000)]
        assert abs(np.mean(draws) - 0.5) < 4 * 0.5 / np.sqrt(2000)

    def test_plus_in_x_is_deterministic(self, rng):
        sv = prepare_cps(Cps(1, 0, "X"))
        cps, p = sv.collapse("X", rng)
        assert (cps.bits, cps.basis) == (0, "X")
        assert p == pytest.approx(1.0)

    def test_frequencies_match_probabilities(self, rng):
        n, draws = 3, 100_000
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        v /= np.linalg.norm(v)
        sv = StateVector(3, v)
        probs = np.abs(v) ** 2
        counts = np.zeros(8)
        for _ in range(draws):
            counts[sv.collapse("Z", rng)[0].bits] += 1
        # 4-sigma multinomial bound per outcome
        sigma = np.sqrt(draws * probs * (1 - probs))
        assert np.all(np.abs(counts - draws * probs) <= 4 * sigma + 1)

    def test_unnormalized_state_rejected(self, rng):
        sv = StateVector(1, np.array([1.0, 1.0]))
        with pytest.raises(NumericalError):
            sv.collapse("Z", rng)


class TestRealnessInvariant:
    def test_odd_y_rotations_keep_amplitudes_real(self, rng):
        pool = build_pool(4)
        for basis in ("Z", "X"):
            sv = prepare_cps(Cps(4, int(rng.integers(0, 16)), basis))
            for _ in range(60):
                gen = pool[int(rng.integers(0, len(pool)))]
                sv.apply_rotation(gen, float(rng.normal()))
            sv.assert_real(1e-10)

    def test_assert_real_raises_on_complex(self):
        sv = prepare_cps(Cps(1, 0))
        sv.apply_rotation(PauliString.from_letters(1, [(0, "X")]), 0.3)
        with pytest.raises(NumericalError):
            sv.assert_real(1e-10)


class TestNormPolicy:
    def test_small_drift_renormalized(self):
        v = np.zeros(2, dtype=complex)
        v[0] = 1.0 + 5e-8
        sv = StateVector(1, v)
        sv.maintain_norm()
        assert abs(sv.norm() - 1.0) < 1e-14

    def test_large_drift_aborts(self):
        sv = StateVector(1, np.array([1.1, 0.0]))
        with pytest.raises(NumericalError):
            sv.maintain_norm()

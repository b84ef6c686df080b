"""Adaptive variational imaginary-time evolution.

The variational state is an ordered product of Pauli-string rotations
exp(-i*theta_mu*A_mu) acting on a product-state reference (generator 1
acts first).  Each step solves M theta_dot = V from the tangent-space
Gram matrix M and energy gradient V, integrates with an Euler step, and
first grows the generator list from an operator pool until the step's
McLachlan distance L^2 = var(H) - V.M^+.V/2 falls below l_cut.

Candidate generators are scored with rank-1 bordered extensions of the
current (M, V) system, so one pool sweep costs one H|phi> application
plus inner products, not a fresh matrix build per candidate.

Internally the evolver works on float64 amplitudes whenever the
reference, pool, and Hamiltonian permit a real wavefunction (odd-Y
generators, even-Y operator terms); the public surface stays complex.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NumericalError
from .model import build_pool
from .pauli import PauliString, WeightedPauliSum, pauli_strings_to_arrays
from .state import NORM_ABORT, NORM_WARN, Cps, StateVector, cps_amplitudes

logger = logging.getLogger(__name__)

SATURATION_EPS = 1e-12
# minimum fraction of a candidate's squared norm that must lie outside the
# current tangent span before it may be appended; nearly-dependent
# directions promise large distance gains but need rad-scale angles that
# break the linearized step
INDEPENDENCE_FLOOR = 1e-4


@dataclass
class AvqiteParams:
    """Knobs of the variational integrator."""

    delta_tau: float = 0.02
    l_cut: float = 1e-3
    solver_cutoff: float = 1e-6
    max_new_ops_per_step: int | None = None

    def __post_init__(self):
        if self.delta_tau <= 0:
            raise ValueError("delta_tau must be positive")
        if self.l_cut <= 0:
            raise ValueError("l_cut must be positive")


@dataclass
class StepDiagnostics:
    """Per-step trace: time, parameter count, post-expansion distance, energy, CNOT count."""

    tau: float
    n_theta: int
    l2: float
    energy: float
    n_cx: int


class Ansatz:
    """Reference CPS plus ordered generators and angles; generator 0 acts first."""

    __slots__ = ("reference", "generators", "thetas")

    def __init__(self, reference: Cps, generators=(), thetas=()):
        self.reference = reference
        self.generators: list[PauliString] = list(generators)
        self.thetas = np.array(thetas, dtype=np.float64)
        if len(self.generators) != len(self.thetas):
            raise ValueError("generator/angle length mismatch")
        for g in self.generators:
            if g.n_qubits != reference.n_qubits:
                raise ValueError("generator qubit count mismatch")

    @property
    def n_params(self) -> int:
        return len(self.generators)

    def copy(self) -> "Ansatz":
        return Ansatz(self.reference, list(self.generators), self.thetas.copy())

    def append(self, generator: PauliString, theta: float = 0.0) -> None:
        """Append a rotation; an adjacent duplicate merges by angle addition."""
        if generator.n_qubits != self.reference.n_qubits:
            raise ValueError("generator qubit count mismatch")
        if self.generators and self.generators[-1] == generator:
            self.thetas[-1] += theta
            return
        self.generators.append(generator)
        self.thetas = np.append(self.thetas, theta)

    def state(self) -> StateVector:
        amps = cps_amplitudes(self.reference)
        xs, zs, ys = pauli_strings_to_arrays(self.generators)
        kernels.rotate_seq(amps, xs, zs, ys, self.thetas)
        return StateVector(self.reference.n_qubits, amps)

    def count_cnots(self) -> int:
        return count_cnots(self)


def count_cnots(a: Ansatz) -> int:
    """Two CNOTs per two-qubit rotation generator, assuming all-to-all connectivity."""
    return 2 * sum(1 for g in a.generators if g.weight == 2)


def _real_path_ok(ansatz: Ansatz, ham: WeightedPauliSum, pool) -> bool:
    # real amplitudes survive iff every rotation generator has odd Y count
    # and every operator term applied to the state has even Y count
    if any(g.y_count % 2 == 0 for g in ansatz.generators):
        return False
    if any(p.y_count % 2 == 0 for p in pool):
        return False
    return all(p.y_count % 2 == 0 for _, p in ham.terms)


def _rows_dot(rows: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Row-conjugated inner products <row_i|vec>."""
    if np.iscomplexobj(rows):
        return rows.conj() @ vec
    return rows @ vec


class EvolutionWorkspace:
    """Shared per-trajectory scratch for the expand / solve / update cycle.

    Mutates the Ansatz it is given.  prepare_step() must run before
    expand()/euler_update() whenever the angles have changed.
    """

    def __init__(self, ansatz: Ansatz, ham: WeightedPauliSum, pool, params: AvqiteParams):
        self.ansatz = ansatz
        self.ham = ham
        self.pool = list(pool)
        self.params = params
        self.dtype = np.float64 if _real_path_ok(ansatz, ham, self.pool) else np.complex128
        self.ref = cps_amplitudes(ansatz.reference, dtype=self.dtype)
        self.hc, self.hx, self.hz, self.hy = ham.arrays()
        if self.pool:
            self.px, self.pz, self.py = pauli_strings_to_arrays(self.pool)
        self.amps = None
        self.saturation_events = 0

    # --- per-step tangent-space assembly -------------------------------

    def prepare_step(self) -> None:
        gx, gz, gy = pauli_strings_to_arrays(self.ansatz.generators)
        thetas = self.ansatz.thetas
        partials = kernels.forward_partials(self.ref, gx, gz, gy, thetas)
        amps = partials[-1]
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > NORM_ABORT:
            raise NumericalError(f"variational state norm drifted by {abs(nrm - 1.0):.3e}")
        if abs(nrm - 1.0) > NORM_WARN:
            logger.info("renormalizing variational state (drift %.3e)", abs(nrm - 1.0))
            partials[-1] /= nrm
        self.amps = amps
        self.d_rows = kernels.derivative_branches(partials, gx, gz, gy, thetas)
        self.hamp = kernels.sum_apply(amps, self.hc, self.hx, self.hz, self.hy)
        self.energy = float(np.real(np.vdot(amps, self.hamp)))
        self.var_h = max(float(np.real(np.vdot(self.hamp, self.hamp))) - self.energy**2, 0.0)
        self.g_vec = _rows_dot(self.d_rows, amps)
        gram = _rows_dot(self.d_rows, self.d_rows.T)
        berry = np.outer(self.g_vec, self.g_vec.conj())
        self.m_mat = 2.0 * np.real(gram - berry)
        self.v_vec = -2.0 * np.real(_rows_dot(self.d_rows, self.hamp))
        self._refresh_solver()

    def _refresh_solver(self) -> None:
        k = self.m_mat.shape[0]
        if k == 0:
            self._eigvals = np.empty(0)
            self._eigvecs = np.empty((0, 0))
            self.theta_dot = np.empty(0)
            self._quad = 0.0
        else:
            w, q = np.linalg.eigh(0.5 * (self.m_mat + self.m_mat.T))
            wmax = float(w[-1])
            keep = w > self.params.solver_cutoff * wmax
            if not np.any(keep):
                if float(np.linalg.norm(self.v_vec)) > 1e-10:
                    raise NumericalError("tangent metric is numerically zero but gradient is not")
                self._eigvals = np.empty(0)
                self._eigvecs = np.empty((k, 0))
                self.theta_dot = np.zeros(k)
                self._quad = 0.0
            else:
                self._eigvals = w[keep]
                self._eigvecs = q[:, keep]
                coeff = (self._eigvecs.T @ self.v_vec) / self._eigvals
                self.theta_dot = self._eigvecs @ coeff
                self._quad = float(self.v_vec @ self.theta_dot)
        self.l2_opt = self._clamp_l2(self.var_h - 0.5 * self._quad)

    def _pseudo_inverse(self) -> np.ndarray:
        if self._eigvals.size == 0:
            return np.zeros((self.m_mat.shape[0], self.m_mat.shape[0]))
        return (self._eigvecs / self._eigvals) @ self._eigvecs.T

    @staticmethod
    def _clamp_l2(value: float) -> float:
        if value < -1e-8:
            raise NumericalError(f"McLachlan distance came out negative: {value:.3e}")
        return max(value, 0.0)

    # --- adaptive expansion ---------------------------------------------

    def expand(self) -> tuple[int, bool]:
        """Greedily append pool generators (at angle 0) until l2_opt <= l_cut.

        Candidates are scored by the exact gain of a rank-1 bordered
        extension of the regularized (M, V) system; appending applies the
        same bordered update to the maintained inverse, theta_dot, and
        all candidate scores in O(K^2 + K*pool), so the predicted gain is
        exactly the realized one.  Returns (number appended, saturated
        flag).  Saturation means no candidate reduced the distance
        further; the step proceeds with the best-effort theta_dot.
        """
        params = self.params
        if self.l2_opt <= params.l_cut or not self.pool:
            return 0, False
        phi = kernels.pauli_apply_batch(self.amps, self.px, self.pz, self.py + 3)
        gp = _rows_dot(phi, self.amps)
        v_new = -2.0 * np.real(_rows_dot(phi, self.hamp))
        m_nn = 2.0 * (1.0 - np.abs(gp) ** 2)
        m_rows = 2.0 * np.real(_rows_dot(phi, self.d_rows.T) - np.outer(gp, self.g_vec.conj()))
        # cross-coupling of every candidate pair, needed as borders stack up
        pair_m = 2.0 * np.real(_rows_dot(phi, phi.T) - np.outer(gp, gp.conj()))
        m_inv = self._pseudo_inverse()
        if self._eigvals.size:
            proj = self._eigvecs.T @ m_rows.T
            m_pinv_m = np.einsum("rp,rp->p", proj, proj / self._eigvals[:, None])
        else:
            m_pinv_m = np.zeros(len(self.pool))
        resid = v_new - m_rows @ self.theta_dot
        schur = m_nn - m_pinv_m
        s_tol = np.maximum(
            INDEPENDENCE_FLOOR * m_nn,
            params.solver_cutoff * max(float(self._eigvals[-1]) if self._eigvals.size else 0.0, 2.0),
        )
        appended = 0
        saturated = False
        cap = params.max_new_ops_per_step
        while self.l2_opt > params.l_cut and (cap is None or appended < cap):
            gain = np.where(schur > s_tol, resid**2 / np.maximum(schur, s_tol), 0.0)
            best = int(np.argmax(gain))
            if 0.5 * gain[best] <= SATURATION_EPS:
                saturated = True
                self.saturation_events += 1
                logger.warning(
                    "ansatz expansion saturated at L2=%.3e (> l_cut=%.1e) with %d generators",
                    self.l2_opt,
                    params.l_cut,
                    self.ansatz.n_params,
                )
                break
            k = self.m_mat.shape[0]
            u = m_inv @ m_rows[best]
            s = float(schur[best])
            alpha = float(resid[best]) / s
            self._append_candidate(best, phi[best], m_rows[best], float(m_nn[best]), float(v_new[best]), gp[best])
            # bordered update of the maintained inverse and solution
            m_inv_ext = np.empty((k + 1, k + 1))
            m_inv_ext[:k, :k] = m_inv + np.outer(u, u) / s
            m_inv_ext[k, :k] = -u / s
            m_inv_ext[:k, k] = -u / s
            m_inv_ext[k, k] = 1.0 / s
            m_inv = m_inv_ext
            self.theta_dot = np.append(self.theta_dot - alpha * u, alpha)
            self._quad += float(resid[best]) * alpha
            self.l2_opt = self._clamp_l2(self.var_h - 0.5 * self._quad)
            # same bordered update, applied to every candidate's score
            w_dot = m_rows @ u
            col = pair_m[:, best]
            m_rows = np.hstack([m_rows, col[:, None]])
            m_pinv_m = m_pinv_m + (w_dot - col) ** 2 / s
            resid = resid + alpha * (w_dot - col)
            schur = m_nn - m_pinv_m
            appended += 1
        return appended, saturated

    def _append_candidate(self, pool_idx, d_row, m_row, m_nn, v_new, g_new) -> None:
        before = self.ansatz.n_params
        self.ansatz.append(self.pool[pool_idx], 0.0)
        if self.ansatz.n_params == before:
            raise NumericalError("expansion tried to append an adjacent duplicate generator")
        self.d_rows = np.vstack([self.d_rows, d_row[None, :]])
        k = self.m_mat.shape[0]
        m_ext = np.empty((k + 1, k + 1))
        m_ext[:k, :k] = self.m_mat
        m_ext[k, :k] = m_row
        m_ext[:k, k] = m_row
        m_ext[k, k] = m_nn
        self.m_mat = m_ext
        self.v_vec = np.append(self.v_vec, v_new)
        self.g_vec = np.append(self.g_vec, g_new)

    # --- Euler update -----------------------------------------------------

    def euler_update(self, dt: float) -> None:
        self.ansatz.thetas = self.ansatz.thetas + dt * self.theta_dot

    def rebuilt_state(self) -> tuple[np.ndarray, float]:
        """Fresh amplitudes and energy at the current angles."""
        amps = self.ref.copy()
        gx, gz, gy = pauli_strings_to_arrays(self.ansatz.generators)
        kernels.rotate_seq(amps, gx, gz, gy, self.ansatz.thetas)
        hamp = kernels.sum_apply(amps, self.hc, self.hx, self.hz, self.hy)
        return amps, float(np.real(np.vdot(amps, hamp)))

    def state_vector(self) -> StateVector:
        return StateVector(self.ansatz.reference.n_qubits, np.asarray(self.amps, dtype=np.complex128).copy())


# --- public single-shot operations (complex path, used by tests/tools) ----


def _tangent_arrays(a: Ansatz) -> tuple[np.ndarray, np.ndarray]:
    ref = cps_amplitudes(a.reference)
    xs, zs, ys = pauli_strings_to_arrays(a.generators)
    partials = kernels.forward_partials(ref, xs, zs, ys, a.thetas)
    d_rows = kernels.derivative_branches(partials, xs, zs, ys, a.thetas)
    return partials[-1], d_rows


def derivative_states(a: Ansatz) -> list[StateVector]:
    """Tangent states: -i*A_mu inserted after the mu-th rotation, product completed."""
    _, d_rows = _tangent_arrays(a)
    return [StateVector(a.reference.n_qubits, row.copy()) for row in d_rows]


def compute_m(a: Ansatz) -> np.ndarray:
    """Tangent-space metric: M = 2 Re[<d_mu|d_nu> - <d_mu|phi><phi|d_nu>]."""
    amps, d_rows = _tangent_arrays(a)
    g = d_rows.conj() @ amps
    m = 2.0 * np.real(d_rows.conj() @ d_rows.T - np.outer(g, g.conj()))
    if m.size and float(np.max(np.abs(m - m.T))) > 1e-9:
        raise NumericalError("metric came out asymmetric")
    return 0.5 * (m + m.T)


def compute_v(a: Ansatz, ham: WeightedPauliSum) -> np.ndarray:
    """Energy gradient: V_mu = -2 Re <d_mu|H|phi> = -dE/d(theta_mu)."""
    amps, d_rows = _tangent_arrays(a)
    coeffs, xs, zs, ys = ham.arrays()
    hamp = kernels.sum_apply(amps, coeffs, xs, zs, ys)
    return -2.0 * np.real(d_rows.conj() @ hamp)


def mclachlan_l2(m_mat: np.ndarray, v_vec: np.ndarray, theta_dot: np.ndarray, var_h: float) -> float:
    """Squared step mismatch: L^2 = theta_dot.M.theta_dot/2 - V.theta_dot + var(H)."""
    if var_h < 0:
        raise ValueError("variance must be non-negative")
    value = 0.5 * float(theta_dot @ m_mat @ theta_dot) - float(v_vec @ theta_dot) + var_h
    return EvolutionWorkspace._clamp_l2(value)


def expand(a: Ansatz, pool, ham: WeightedPauliSum, params: AvqiteParams, tau: float = 0.0):
    """Grow a copy of the ansatz until the optimal L^2 is below l_cut (or saturation)."""
    grown = a.copy()
    ws = EvolutionWorkspace(grown, ham, pool, params)
    ws.prepare_step()
    ws.expand()
    diag = StepDiagnostics(tau, grown.n_params, ws.l2_opt, ws.energy, grown.count_cnots())
    return grown, diag


def euler_step(a: Ansatz, ham: WeightedPauliSum, params: AvqiteParams, tau: float = 0.0):
    """One Euler update of a copy of the ansatz (expansion assumed already done)."""
    stepped = a.copy()
    ws = EvolutionWorkspace(stepped, ham, [], params)
    ws.prepare_step()
    l2 = ws.l2_opt
    ws.euler_update(params.delta_tau)
    _, energy = ws.rebuilt_state()
    diag = StepDiagnostics(tau + params.delta_tau, stepped.n_params, l2, energy, stepped.count_cnots())
    return stepped, diag


def _tau_grid(tau_final: float, delta_tau: float) -> list[float]:
    """Step sizes covering [0, tau_final]; a non-multiple tail becomes a shortened last step."""
    n_full = int(np.floor(tau_final / delta_tau + 1e-12))
    steps = [delta_tau] * n_full
    rem = tau_final - n_full * delta_tau
    if rem > 1e-12:
        steps.append(rem)
    return steps


def evolve(
    reference: Cps,
    ham: WeightedPauliSum,
    tau_final: float,
    params: AvqiteParams,
    pool=None,
    on_step=None,
) -> tuple[Ansatz, StateVector, list[StepDiagnostics]]:
    """Propagate a CPS to imaginary time tau_final (= beta/2 for a thermal state).

    Alternates ansatz expansion and Euler updates on a delta_tau grid and
    returns the grown ansatz, the final state, and the per-step
    diagnostics trace (including the tau = 0 row).
    """
    if tau_final < 0:
        raise ValueError("tau_final must be non-negative")
    if pool is None:
        pool = build_pool(ham.n_qubits)
    ansatz = Ansatz(reference)
    ws = EvolutionWorkspace(ansatz, ham, pool, params)
    ws.prepare_step()
    diags = [StepDiagnostics(0.0, ansatz.n_params, 0.0, ws.energy, ansatz.count_cnots())]
    if on_step is not None:
        on_step(0.0, ws.state_vector())
    tau = 0.0
    for k, dt in enumerate(_tau_grid(tau_final, params.delta_tau)):
        if k > 0:
            ws.prepare_step()
        ws.expand()
        l2 = ws.l2_opt
        ws.euler_update(dt)
        tau += dt
        amps, energy = ws.rebuilt_state()
        diags.append(StepDiagnostics(tau, ansatz.n_params, l2, energy, ansatz.count_cnots()))
        if on_step is not None:
            on_step(tau, StateVector(ham.n_qubits, np.asarray(amps, dtype=np.complex128).copy()))
    final = ansatz.state()
    final.maintain_norm()
    return ansatz, final, diags


def diagnostics_to_csv(diags, fh) -> None:
    """Write a diagnostics trace with the canonical column set."""
    fh.write("tau,n_theta,l2,energy,n_cx\n")
    for d in diags:
        fh.write(f"{d.tau!r},{d.n_theta},{d.l2!r},{d.energy!r},{d.n_cx}\n")

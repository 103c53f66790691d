"""Truncated-Fock reference dynamics and operator-identity checks."""

import numpy as np
import pytest
from scipy.linalg import expm

from nmqsd.baths import DiscreteBathSpec, KernelHandle, kernel_eval
from nmqsd.fock_oracle import (
    FockTruncation,
    TotalState,
    bargmann_project,
    bath_z_operator,
    build_interaction_generator,
    ehrenfest_residual,
    equal_time_commutator_residual,
    exponential_vector,
    io_relation_residual,
    ladder_operators,
    propagate_total,
    propagate_unitary,
    reduced_density,
    single_excitation_propagate,
)
from nmqsd.jaynes_cummings import EXCITED, GROUND, solve_lambda_volterra
from nmqsd.sampling import trajectory_from_amplitudes
from nmqsd.timegrid import TimeGrid
from nmqsd.unravel import SystemModel

JC = SystemModel.jaynes_cummings()


def jc_spec(omega=1.0, g=1.0, detuning=1.0):
    return DiscreteBathSpec([omega], [g], detuning=detuning)


class TestGenerator:
    def test_decoupled_system_is_hamiltonian_only(self):
        rng = np.random.default_rng(71)
        h = rng.normal(size=(2, 2))
        h = h + h.T
        model = SystemModel(2, h, np.zeros((2, 2)))
        spec = DiscreteBathSpec([1.0], [0.0])
        trunc = FockTruncation(n_max=2, mode_count=1)
        gen = build_interaction_generator(model, spec, trunc, 0.3)
        np.testing.assert_allclose(gen, np.kron(-1j * h, np.eye(3)), atol=1e-14)

    def test_two_point_vacuum_expectations(self):
        rng = np.random.default_rng(72)
        spec = DiscreteBathSpec([0.4, 1.7], [0.8, 0.5 - 0.3j], detuning=0.2)
        trunc = FockTruncation(n_max=2, mode_count=2)
        vac = np.zeros(trunc.bath_dim, dtype=complex)
        vac[0] = 1.0
        handle = KernelHandle.discrete(spec)
        for _ in range(20):
            t, s = rng.uniform(0, 5, 2)
            z_t = bath_z_operator(spec, trunc, t)
            z_s = bath_z_operator(spec, trunc, s)
            val = np.vdot(z_t @ vac, z_s @ vac)  # <vac|Z_t^dag Z_s|vac>
            assert abs(val - kernel_eval(handle, t, s)) < 1e-12
            assert abs(np.vdot(vac, z_t @ (z_s @ vac))) < 1e-12
            assert abs(np.vdot(vac, z_t.conj().T @ (z_s.conj().T @ vac))) < 1e-12
            assert abs(np.vdot(vac, z_t @ (z_s.conj().T @ vac))) < 1e-12

    def test_commutator_identity_on_restricted_states(self):
        rng = np.random.default_rng(73)
        spec = DiscreteBathSpec([0.9, 2.1], [1.1, 0.6j])
        trunc = FockTruncation(n_max=3, mode_count=2)
        handle = KernelHandle.discrete(spec)
        below = ~trunc.top_rung_mask()
        for _ in range(5):
            t, s = rng.uniform(0, 4, 2)
            z_t = bath_z_operator(spec, trunc, t)
            z_s = bath_z_operator(spec, trunc, s)
            comm = z_t.conj().T @ z_s - z_s @ z_t.conj().T
            defect = comm - kernel_eval(handle, t, s) * np.eye(trunc.bath_dim)
            assert np.max(np.abs(defect[:, below])) < 1e-12

    def test_dimension_guard(self):
        with pytest.raises(ValueError, match="truncation too large"):
            FockTruncation(n_max=30, mode_count=3)


class TestPropagation:
    def test_free_system_evolution(self):
        rng = np.random.default_rng(74)
        h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = 0.5 * (h + h.conj().T)
        model = SystemModel(2, h, np.zeros((2, 2)))
        spec = DiscreteBathSpec([1.0], [0.0])
        trunc = FockTruncation(n_max=1, mode_count=1)
        grid = TimeGrid(2.0, 501)
        phi = np.array([0.6, 0.8], dtype=complex)
        states, leakage = propagate_total(model, spec, trunc, phi, grid)
        target = expm(-1j * h * grid.horizon) @ phi
        final_sys = states[-1].reshape(2, -1)[:, 0]
        assert np.max(np.abs(final_sys - target)) < 1e-8
        assert np.max(leakage) == 0.0

    def test_jc_matches_volterra(self):
        spec = jc_spec()
        grid = TimeGrid(2.0, 2001)
        lam = solve_lambda_volterra(KernelHandle.discrete(spec), grid)
        trunc = FockTruncation(n_max=1, mode_count=1)
        states, _ = propagate_total(JC, spec, trunc, np.array([1.0, 0.0]), grid, leak_tol=2.0)
        excited = states[:, 0]  # |e> (x) |0>
        assert np.max(np.abs(excited - lam.values)) < 1e-6

    def test_norm_conserved_above_reachable_excitation(self):
        spec = jc_spec()
        trunc = FockTruncation(n_max=2, mode_count=1)
        grid = TimeGrid(3.0, 1501)
        states, leakage = propagate_total(JC, spec, trunc, np.array([1.0, 0.0]), grid)
        norms = np.linalg.norm(states, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-10
        assert np.max(leakage) < 1e-20

    def test_sector_equivalence(self):
        spec = DiscreteBathSpec([0.7, 1.9, 3.2], [0.5, 0.8, 0.3], detuning=1.0)
        grid = TimeGrid(2.5, 1251)
        c_e, c_modes = single_excitation_propagate(spec, grid)
        trunc = FockTruncation(n_max=1, mode_count=3)
        states, _ = propagate_total(JC, spec, trunc, np.array([1.0, 0.0]), grid, leak_tol=2.0)
        assert np.max(np.abs(states[:, 0] - c_e)) < 1e-8
        norms = np.abs(c_e) ** 2 + np.sum(np.abs(c_modes) ** 2, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-10

    def test_single_excitation_resonant_cosine(self):
        spec = jc_spec()
        grid = TimeGrid(2.0 * np.pi, 2001)
        c_e, _ = single_excitation_propagate(spec, grid)
        assert np.max(np.abs(c_e - np.cos(grid.points))) < 1e-8

    def test_detuned_modes_match_volterra(self):
        spec = DiscreteBathSpec([0.5, 1.5, 2.5], [0.4, 0.7, 0.2], detuning=1.2)
        grid = TimeGrid(3.0, 3001)
        c_e, _ = single_excitation_propagate(spec, grid)
        lam = solve_lambda_volterra(KernelHandle.discrete(spec), grid)
        assert np.max(np.abs(c_e - lam.values)) < 1e-6

    def test_leakage_monotone_in_cutoff(self):
        # drive the system so multiple quanta pile up, then raise the cutoff
        model = SystemModel(2, np.zeros((2, 2)), np.array([[0.0, 1.0], [1.0, 0.0]]))
        spec = DiscreteBathSpec([0.8], [0.7])
        grid = TimeGrid(1.5, 751)
        leaks = []
        for n_max in (2, 3, 4, 5):
            trunc = FockTruncation(n_max=n_max, mode_count=1)
            _, leakage = propagate_total(
                model, spec, trunc, np.array([1.0, 0.0]), grid, leak_tol=2.0
            )
            leaks.append(np.max(leakage))
        assert all(b <= a + 1e-15 for a, b in zip(leaks, leaks[1:]))


class TestReducedDensity:
    def test_initial_projector(self):
        spec = jc_spec()
        trunc = FockTruncation(n_max=1, mode_count=1)
        grid = TimeGrid(1.0, 11)
        phi = np.array([0.6, 0.8j], dtype=complex)
        states, _ = propagate_total(JC, spec, trunc, phi, grid, leak_tol=2.0)
        rho0 = reduced_density(states[0], 2)
        np.testing.assert_allclose(rho0, np.outer(phi, np.conj(phi)), atol=1e-14)

    def test_jc_density_pattern(self):
        spec = jc_spec()
        grid = TimeGrid(2.0, 2001)
        phi = np.array([0.8, 0.6], dtype=complex)
        trunc = FockTruncation(n_max=1, mode_count=1)
        states, _ = propagate_total(JC, spec, trunc, phi, grid, leak_tol=2.0)
        c_e, _ = single_excitation_propagate(spec, grid)
        for idx in (500, 1000, 1999):
            rho = reduced_density(states[idx], 2)
            lam_t = c_e[idx]
            assert abs(rho[EXCITED, EXCITED] - abs(phi[EXCITED] * lam_t) ** 2) < 1e-8
            expected_coherence = phi[EXCITED] * lam_t * np.conj(phi[GROUND])
            assert abs(rho[EXCITED, GROUND] - expected_coherence) < 1e-8
            assert abs(np.trace(rho) - 1.0) < 1e-10
            purity = np.real(np.trace(rho @ rho))
            assert purity <= 1.0 + 1e-10

    def test_hermitian_positive(self):
        spec = DiscreteBathSpec([0.5, 1.5], [0.5, 0.4])
        trunc = FockTruncation(n_max=1, mode_count=2)
        grid = TimeGrid(2.0, 501)
        states, _ = propagate_total(JC, spec, trunc, np.array([1.0, 0.0]), grid, leak_tol=2.0)
        rho = reduced_density(states[-1], 2)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-12


class TestBargmann:
    def test_zero_amplitude_is_vacuum_component(self):
        trunc = FockTruncation(n_max=2, mode_count=1)
        vec = np.arange(6, dtype=complex)
        state = TotalState(vector=vec / np.linalg.norm(vec), trunc=trunc)
        projected = bargmann_project(state, np.zeros(1))
        np.testing.assert_allclose(projected, state.vector.reshape(2, 3)[:, 0])

    def test_time_zero_returns_initial_state(self):
        rng = np.random.default_rng(75)
        spec = jc_spec()
        trunc = FockTruncation(n_max=3, mode_count=1)
        phi = np.array([0.48, 0.6 - 0.64j], dtype=complex)
        grid = TimeGrid(1.0, 11)
        states, _ = propagate_total(JC, spec, trunc, phi, grid, leak_tol=2.0)
        state0 = TotalState(vector=states[0], trunc=trunc)
        for _ in range(5):
            f = 0.4 * (rng.normal(size=1) + 1j * rng.normal(size=1))
            np.testing.assert_allclose(bargmann_project(state0, f), phi, atol=1e-12)

    def test_projection_matches_closed_form(self):
        # the central cross-validation: the microscopic state projected on
        # a coherent amplitude equals the closed-form trajectory state at
        # zeta = zeta(f)
        rng = np.random.default_rng(76)
        spec = jc_spec(omega=1.3, g=0.9, detuning=1.0)
        grid = TimeGrid(2.0, 2001)
        lam = solve_lambda_volterra(KernelHandle.discrete(spec), grid)
        trunc = FockTruncation(n_max=3, mode_count=1)
        phi = np.array([0.8, 0.6], dtype=complex)
        states, _ = propagate_total(JC, spec, trunc, phi, grid, leak_tol=2.0)
        from nmqsd.jaynes_cummings import jc_state_series

        for _ in range(10):
            f = 0.4 * (rng.normal(size=1) + 1j * rng.normal(size=1))
            zeta = trajectory_from_amplitudes(spec, f, grid)
            closed = jc_state_series(phi, lam, zeta).amplitudes
            idx = int(rng.integers(1, grid.n_points))
            state = TotalState(vector=states[idx], trunc=trunc)
            projected = bargmann_project(state, f)
            assert np.max(np.abs(projected - closed[idx])) < 1e-6

    def test_amplitude_guard(self):
        trunc = FockTruncation(n_max=2, mode_count=1)
        with pytest.raises(ValueError, match="amplitude too large"):
            exponential_vector(np.array([2.0]), trunc)

    def test_resolution_of_identity(self):
        # E_f[<Phi|e^f><e^f|Psi>] = <Phi|Psi> for truncated bath vectors
        rng = np.random.default_rng(77)
        trunc = FockTruncation(n_max=3, mode_count=1)
        ns = np.arange(trunc.n_max + 1)
        phi_vec = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi_vec = rng.normal(size=4) + 1j * rng.normal(size=4)
        phi_vec /= np.linalg.norm(phi_vec)
        psi_vec /= np.linalg.norm(psi_vec)
        n_samples = 100_000
        fs = (rng.standard_normal(n_samples) + 1j * rng.standard_normal(n_samples)) / np.sqrt(2.0)
        from math import factorial

        powers = fs[:, None] ** ns / np.sqrt([factorial(n) for n in ns])
        overlaps = (np.conj(powers) @ psi_vec) * (powers @ np.conj(phi_vec))
        estimate = overlaps.mean()
        stderr = np.sqrt(
            (overlaps.real.var(ddof=1) + overlaps.imag.var(ddof=1)) / n_samples
        )
        target = np.vdot(phi_vec, psi_vec)
        assert abs(estimate - target) < 5.0 * stderr


class TestOperatorIdentities:
    def setup_method(self):
        self.spec = jc_spec()
        self.trunc = FockTruncation(n_max=3, mode_count=1)
        self.grid = TimeGrid(0.6, 601)  # dt = 1e-3
        self.unitaries = propagate_unitary(JC, self.spec, self.trunc, self.grid)

    def test_io_residual_zero_at_time_zero(self):
        res = io_relation_residual(JC, self.spec, self.trunc, 0, self.grid, self.unitaries)
        assert res < 1e-12

    def test_io_residual_small(self):
        res = io_relation_residual(JC, self.spec, self.trunc, 500, self.grid, self.unitaries)
        assert res < 1e-5

    def test_equal_time_commutation(self):
        rng = np.random.default_rng(78)
        for _ in range(3):
            x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            x = 0.5 * (x + x.conj().T)
            res = equal_time_commutator_residual(
                JC, self.spec, self.trunc, x, 450, self.grid, self.unitaries
            )
            assert res < 1e-6

    def test_ehrenfest_identity_excited_projector(self):
        grid = TimeGrid(1.0, 1001)
        unitaries = propagate_unitary(JC, self.spec, self.trunc, grid)
        x = np.zeros((2, 2))
        x[EXCITED, EXCITED] = 1.0
        residuals = ehrenfest_residual(JC, self.spec, self.trunc, x, grid, unitaries)
        assert np.max(residuals) < 1e-5
        # the left side is d|lambda|^2/dt, tied to the memory integral
        lam = solve_lambda_volterra(KernelHandle.discrete(self.spec), grid)
        idx = 500
        weights = np.full(idx + 1, grid.step)
        weights[0] = weights[-1] = 0.5 * grid.step
        kern_row = kernel_eval(
            KernelHandle.discrete(self.spec), grid.points[idx], grid.points[: idx + 1]
        )
        memory = np.dot(weights * kern_row, lam.values[: idx + 1])
        rate_identity = -2.0 * np.real(np.conj(lam.values[idx]) * memory)
        rho_ee = np.abs(lam.values) ** 2
        lhs = (rho_ee[idx + 1] - rho_ee[idx - 1]) / (2.0 * grid.step)
        assert abs(lhs - rate_identity) < 1e-6

    def test_ehrenfest_identity_trivial_for_identity(self):
        residuals = ehrenfest_residual(
            JC, self.spec, self.trunc, np.eye(2), TimeGrid(0.4, 401), None
        )
        assert np.max(residuals) < 1e-10

    def test_ehrenfest_closed_system(self):
        # residual is pure central-difference error; a gentle Hamiltonian
        # and a fine grid push it below 1e-8
        rng = np.random.default_rng(79)
        h = rng.normal(size=(2, 2))
        h = 0.15 * (h + h.T)
        model = SystemModel(2, h, np.zeros((2, 2)))
        spec = DiscreteBathSpec([1.0], [0.0])
        x = np.array([[1.0, 0.0], [0.0, -1.0]])
        residuals = ehrenfest_residual(model, spec, self.trunc, x, TimeGrid(0.5, 2001), None)
        assert np.max(residuals) < 1e-8

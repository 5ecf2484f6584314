"""Pulse shapes, mixing angles, the analytic eigenframe and basis transforms."""

import math

import numpy as np
import pytest

from lambda_sim.model import (
    ControlPulse,
    StateVector,
    SystemParams,
    angle_rates,
    bare_to_eigen,
    dark_state,
    eigen_to_bare,
    eigenframe,
    hamiltonian_matrix,
    mixing_angles,
    nonadiabatic_couplings,
    pulse_amplitude,
    pulse_derivative,
)

# independently computed: 1 - (e^6 - 1)/(e^6 + 1)
ONE_MINUS_TANH3 = 0.004945246313269536
# Newton iteration on x^2 = 1.01
SQRT_1_01 = 1.0049875621120892


def params(g0=0.1, r=0.1, **kw):
    return SystemParams(g0=g0, r=r, **kw)


class TestSystemParams:
    def test_effective_coupling_scales_with_photon_number(self):
        p = params(g0=0.2, n=3)
        assert p.g_n == pytest.approx(0.4)
        assert params(g0=0.2).g_n == 0.2

    @pytest.mark.parametrize("kw", [
        {"g0": 0.0}, {"g0": -0.1}, {"r": 0.0}, {"gamma": -1e-3}, {"n": -1},
    ])
    def test_invalid_parameters_rejected(self, kw):
        base = {"g0": 0.1, "r": 0.1}
        base.update(kw)
        with pytest.raises(ValueError):
            SystemParams(**base)

    def test_common_detuning_requires_two_photon_resonance(self):
        assert params(delta_s=0.3, delta_c=0.3).delta == 0.3
        with pytest.raises(ValueError):
            _ = params(delta_s=0.3, delta_c=0.2).delta


class TestControlPulse:
    def test_storage_starts_at_full_amplitude(self):
        pulse = ControlPulse.storage(params())
        assert pulse.amplitude(0.0) == 1.0

    def test_retrieval_starts_at_zero(self):
        pulse = ControlPulse.retrieval(params())
        assert pulse.amplitude(0.0) == 0.0

    def test_storage_amplitude_frozen_value(self):
        pulse = ControlPulse.storage(params(r=0.1))
        assert pulse.amplitude(30.0) == pytest.approx(ONE_MINUS_TANH3, rel=1e-12)

    def test_constant_returns_level(self):
        pulse = ControlPulse.constant(params(), 0.7)
        assert pulse.amplitude(0.0) == 0.7
        assert pulse.amplitude(12.3) == 0.7
        assert pulse.derivative(5.0) == 0.0

    def test_negative_time_rejected(self):
        pulse = ControlPulse.storage(params())
        with pytest.raises(ValueError):
            pulse.amplitude(-0.1)
        with pytest.raises(ValueError):
            pulse.derivative(-1e-9)

    def test_derivative_signs_at_origin(self):
        p = params(r=0.1)
        assert ControlPulse.retrieval(p).derivative(0.0) == pytest.approx(0.1)
        assert ControlPulse.storage(p).derivative(0.0) == pytest.approx(-0.1)

    @pytest.mark.parametrize("kind", ["storage", "retrieval", "constant"])
    def test_derivative_matches_finite_difference(self, kind):
        p = params(r=0.3)
        pulse = ControlPulse(kind, p.r, p.omega0, level=0.6)
        h = 1e-5
        for t in (0.1, 0.7, 2.0, 9.0):
            fd = (pulse.amplitude(t + h) - pulse.amplitude(t - h)) / (2 * h)
            exact = pulse.derivative(t)
            assert exact == pytest.approx(fd, rel=1e-6, abs=1e-12)

    def test_monotonicity_and_range(self):
        p = params(r=0.4)
        t = np.linspace(0.0, 30.0, 400)
        sto = ControlPulse.storage(p).amplitude(t)
        ret = ControlPulse.retrieval(p).amplitude(t)
        assert np.all(np.diff(sto) <= 0.0)
        assert np.all(np.diff(ret) >= 0.0)
        assert np.all((sto > 0.0) & (sto <= 1.0))
        assert np.all((ret >= 0.0) & (ret < 1.0))

    def test_module_level_helpers_delegate(self):
        pulse = ControlPulse.retrieval(params(r=0.2))
        assert pulse_amplitude(pulse, 3.0) == pulse.amplitude(3.0)
        assert pulse_derivative(pulse, 3.0) == pulse.derivative(3.0)


class TestMixingAngles:
    def test_zero_control_gives_exactly_pi_half(self):
        theta, _ = mixing_angles(params(), 0.0)
        assert theta == math.pi / 2

    def test_resonant_psi_is_pi_half(self):
        for omega_c in (0.0, 0.3, 1.5):
            _, psi = mixing_angles(params(), omega_c)
            assert psi == math.pi / 2

    def test_theta_pi_quarter_at_equal_couplings(self):
        p = params(g0=0.25)
        theta, _ = mixing_angles(p, 0.25)
        assert theta == pytest.approx(math.pi / 4, abs=1e-15)

    def test_angle_ranges(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            delta = rng.uniform(-2.0, 2.0)
            p = params(g0=rng.uniform(0.01, 0.5), delta_s=delta, delta_c=delta)
            theta, psi = mixing_angles(p, rng.uniform(0.0, 2.0))
            assert 0.0 < theta <= math.pi / 2
            assert 0.0 < psi < math.pi


class TestHamiltonian:
    def test_matrix_entries_for_quoted_case(self):
        h = hamiltonian_matrix(params(), 1.0)
        expect = np.array([[0.0, 0.1, -1.0], [0.1, 0.0, 0.0], [-1.0, 0.0, 0.0]])
        np.testing.assert_allclose(h, expect, atol=0.0)

    def test_diagonal_when_uncoupled(self):
        # g0 cannot vanish, but 1e-300 isolates the detuning structure
        p = SystemParams(g0=1e-300, r=0.1, delta_s=0.4, delta_c=0.4)
        h = hamiltonian_matrix(p, 0.0)
        np.testing.assert_allclose(h, np.diag([0.0, 0.4, 0.4]), atol=1e-299)

    def test_hermitian_for_random_draws(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p = params(g0=rng.uniform(0.01, 0.5), delta_s=rng.normal(),
                       delta_c=rng.normal(), phi=rng.uniform(0, 2 * math.pi))
            h = hamiltonian_matrix(p, rng.uniform(0.0, 2.0))
            np.testing.assert_allclose(h, h.conj().T, atol=1e-15)


def _char_poly_roots(h):
    # coefficients of det(lambda I - H) assembled from traces/minors, roots
    # from the companion matrix: independent of the analytic eigen formulas
    tr = np.trace(h).real
    minors = 0.0
    for i in range(3):
        idx = [j for j in range(3) if j != i]
        sub = h[np.ix_(idx, idx)]
        minors += (sub[0, 0] * sub[1, 1] - sub[0, 1] * sub[1, 0]).real
    det = np.linalg.det(h).real
    return np.sort(np.roots([1.0, -tr, minors, -det]).real)


class TestEigenframe:
    def test_eigenvalues_for_quoted_case(self):
        frame = eigenframe(params(), 1.0)
        np.testing.assert_allclose(
            frame.lambdas, [0.0, SQRT_1_01, -SQRT_1_01], atol=1e-14)

    def test_eigenvalues_against_characteristic_polynomial(self):
        rng = np.random.default_rng(23)
        for _ in range(300):
            delta = rng.uniform(-1.5, 1.5)
            p = params(g0=rng.uniform(0.01, 0.5), delta_s=delta, delta_c=delta,
                       phi=rng.uniform(0, 2 * math.pi))
            omega_c = rng.uniform(0.0, 2.0)
            frame = eigenframe(p, omega_c)
            roots = _char_poly_roots(hamiltonian_matrix(p, omega_c))
            np.testing.assert_allclose(np.sort(frame.lambdas), roots, atol=1e-8)

    def test_residual_orthonormality_purity(self):
        rng = np.random.default_rng(31)
        worst_res, worst_gram = 0.0, 0.0
        for _ in range(1000):
            delta = rng.uniform(-1.0, 1.0) if rng.random() < 0.7 else 0.0
            p = params(g0=rng.uniform(0.01, 0.5), delta_s=delta, delta_c=delta,
                       phi=rng.uniform(0, 2 * math.pi))
            omega_c = rng.uniform(0.0, 2.0)
            frame = eigenframe(p, omega_c)
            h = hamiltonian_matrix(p, omega_c)
            res = h @ frame.vectors - frame.vectors * frame.lambdas[None, :]
            worst_res = max(worst_res, float(np.max(np.abs(res))))
            gram = frame.vectors.conj().T @ frame.vectors
            worst_gram = max(worst_gram, float(np.max(np.abs(gram - np.eye(3)))))
            assert frame.dark_vector[0] == 0.0
        assert worst_res < 1e-10
        assert worst_gram < 1e-12

    def test_dark_state_at_zero_control_is_bare_c(self):
        frame = eigenframe(params(), 0.0)
        np.testing.assert_allclose(frame.dark_vector, [0.0, 0.0, 1.0], atol=0.0)

    def test_requires_two_photon_resonance(self):
        with pytest.raises(ValueError):
            eigenframe(params(delta_s=0.1, delta_c=0.2), 1.0)


class TestAngleRates:
    def test_resonant_psi_rate_vanishes(self):
        _, psi_dot = angle_rates(params(), 0.7, 0.3)
        assert psi_dot == 0.0

    def test_retrieval_start_rate(self):
        p = params(g0=0.05, r=0.1)
        theta_dot, _ = angle_rates(p, 0.0, p.r * p.omega0)
        assert theta_dot == pytest.approx(-p.r / p.g_n, rel=1e-13)

    def test_static_control_has_zero_rates(self):
        assert angle_rates(params(delta_s=0.5, delta_c=0.5), 0.9, 0.0) == (0.0, 0.0)

    def test_rates_match_finite_differences(self):
        h = 1e-5
        for delta in (0.0, 0.5, -0.8):
            p = params(g0=0.15, r=0.3, delta_s=delta, delta_c=delta)
            pulse = ControlPulse.storage(p)
            for t in (0.5, 2.0, 5.0):
                w, dw = pulse.amplitude(t), pulse.derivative(t)
                theta_dot, psi_dot = angle_rates(p, w, dw)
                tp, pp = mixing_angles(p, pulse.amplitude(t + h))
                tm, pm = mixing_angles(p, pulse.amplitude(t - h))
                assert theta_dot == pytest.approx((tp - tm) / (2 * h), rel=1e-6)
                fd_psi = (pp - pm) / (2 * h)
                if delta == 0.0:
                    assert psi_dot == 0.0
                    assert abs(fd_psi) < 1e-12
                else:
                    assert psi_dot == pytest.approx(fd_psi, rel=1e-6)


class TestNonadiabaticCouplings:
    def test_zero_rates_give_zero_table(self):
        frame = eigenframe(params(), 0.8)
        table = nonadiabatic_couplings(frame, 0.0, 0.0)
        np.testing.assert_allclose(table, np.zeros((3, 3)), atol=0.0)

    def test_resonant_values(self):
        frame = eigenframe(params(), 0.8)
        x = 0.37
        table = nonadiabatic_couplings(frame, x, 0.0, phi=0.0)
        assert table[0, 1] == pytest.approx(x * math.sin(math.pi / 4), rel=1e-14)
        assert table[0, 2] == pytest.approx(x * math.cos(math.pi / 4), rel=1e-14)
        assert table[1, 2] == 0.0

    def test_anti_hermitian_for_random_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            delta = rng.uniform(-1, 1)
            p = params(g0=rng.uniform(0.05, 0.4), delta_s=delta, delta_c=delta,
                       phi=rng.uniform(0, 2 * math.pi))
            frame = eigenframe(p, rng.uniform(0, 2))
            table = nonadiabatic_couplings(frame, rng.normal(), rng.normal(), p.phi)
            np.testing.assert_allclose(table, -table.conj().T, atol=1e-15)
            np.testing.assert_allclose(np.diag(table), 0.0, atol=0.0)

    def test_table_matches_differentiated_eigenvectors(self):
        # sample times with mild rates: central differences of the
        # eigenvectors resolve 1e-10 only away from the switching edge
        h = 1e-5
        for delta, phi in ((0.0, 0.0), (0.5, 0.3), (-0.4, 1.2)):
            p = params(g0=0.15, r=0.4, delta_s=delta, delta_c=delta, phi=phi)
            pulse = ControlPulse.retrieval(p)
            for t in (1.5, 2.5, 4.0):
                w, dw = pulse.amplitude(t), pulse.derivative(t)
                frame = eigenframe(p, w)
                table = nonadiabatic_couplings(frame, *angle_rates(p, w, dw), phi=phi)
                dv = (eigenframe(p, pulse.amplitude(t + h)).vectors
                      - eigenframe(p, pulse.amplitude(t - h)).vectors) / (2 * h)
                fd = frame.vectors.conj().T @ dv
                for k in range(3):  # vanishing gauge phases
                    assert abs(fd[k, k]) < 1e-10
                fd -= np.diag(np.diag(fd))
                np.testing.assert_allclose(table, fd, atol=1e-6)


class TestBasisTransforms:
    def test_dark_coefficient_at_zero_control(self):
        frame = eigenframe(params(), 0.0)
        state = StateVector.eigen([1.0, 0.0, 0.0])
        bare = eigen_to_bare(frame, state)
        np.testing.assert_allclose(bare.amps, [0.0, 0.0, 1.0], atol=0.0)

    def test_excited_amplitude_from_plus_coefficient(self):
        frame = eigenframe(params(), 0.8)
        bare = eigen_to_bare(frame, StateVector.eigen([0.0, 1.0, 0.0]))
        assert bare.amps[0] == pytest.approx(math.cos(math.pi / 4), rel=1e-14)

    def test_round_trip_on_random_states(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            delta = rng.uniform(-1, 1)
            p = params(g0=rng.uniform(0.05, 0.4), delta_s=delta, delta_c=delta,
                       phi=rng.uniform(0, 2 * math.pi))
            frame = eigenframe(p, rng.uniform(0, 2))
            amps = rng.normal(size=3) + 1j * rng.normal(size=3)
            amps /= np.linalg.norm(amps)
            phases = rng.uniform(-20, 20, size=3)
            state = StateVector.bare(amps)
            eigen = bare_to_eigen(frame, state, phases)
            back = eigen_to_bare(frame, eigen)
            np.testing.assert_allclose(back.amps, amps, atol=1e-12)
            assert eigen.norm == pytest.approx(1.0, abs=1e-12)

    def test_projection_matches_manual_inner_products(self):
        rng = np.random.default_rng(19)
        p = params(g0=0.2, delta_s=0.3, delta_c=0.3, phi=0.4)
        frame = eigenframe(p, 0.9)
        amps = rng.normal(size=3) + 1j * rng.normal(size=3)
        amps /= np.linalg.norm(amps)
        phases = np.array([1.3, -0.2, 4.0])
        eigen = bare_to_eigen(frame, StateVector.bare(amps), phases)
        for k in range(3):
            manual = np.vdot(frame.vectors[:, k], amps) * np.exp(1j * phases[k])
            assert eigen.amps[k] == pytest.approx(manual, rel=1e-14)

    def test_missing_phases_is_a_contract_violation(self):
        frame = eigenframe(params(), 0.5)
        bad = StateVector("eigen", np.array([1.0, 0, 0], dtype=complex))
        with pytest.raises(ValueError):
            eigen_to_bare(frame, bad)
        with pytest.raises(ValueError):
            eigen_to_bare(frame, StateVector.bare([0, 0, 1]))

    def test_dark_state_helper_is_normalized_dark_vector(self):
        p = params(g0=0.05)
        state = dark_state(p, 1.0)
        frame = eigenframe(p, 1.0)
        np.testing.assert_allclose(state.amps, frame.dark_vector, atol=0.0)
        assert state.norm == pytest.approx(1.0, abs=1e-15)


class TestStateVector:
    def test_shape_and_basis_validation(self):
        with pytest.raises(ValueError):
            StateVector.bare([1.0, 0.0])
        with pytest.raises(ValueError):
            StateVector("weird", np.zeros(3, dtype=complex))

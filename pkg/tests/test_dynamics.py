"""
Tests for the spin equations of motion, the collapse envelope and the
two-level amplitude integrator.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from cqd.atomkit import potassium39
from cqd.dynamics import (
    DynamicsConfig,
    SpinState,
    amplitudes_from_angles,
    branch,
    collapse_envelope,
    collapse_times,
    cqd_rhs,
    default_tau_max,
    integrate_ensemble,
    integrate_spin,
    integrate_two_level,
    majorana_tau_scale,
)
from cqd.errors import DomainError
from cqd.models import Physics

GAMMA_E = 1.761e11


def constant_field(b_z, b_y=0.0):
    return lambda t: (0.0, b_y, b_z)


class TestSpinState:
    """Validation and wrapping of state angles."""

    def test_azimuths_are_wrapped(self):
        state = SpinState(1.0, 7.0, 2.0, -1.0)
        assert state.phi_e == pytest.approx(7.0 - 2.0 * math.pi)
        assert state.phi_n == pytest.approx(2.0 * math.pi - 1.0)

    def test_polar_angle_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            SpinState(3.5, 0.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            SpinState(1.0, 0.0, -0.1, 0.0)

    def test_vector_round_trip(self):
        state = SpinState(0.4, 1.2, 2.2, 3.0, 5.0)
        assert SpinState.from_vector(state.as_vector()) == state

    def test_unit_vectors(self):
        state = SpinState(math.pi / 2, 0.0, 0.0, 0.0)
        assert state.electron_vector() == pytest.approx([1.0, 0.0, 0.0], abs=1e-15)
        assert state.nuclear_vector() == pytest.approx([0.0, 0.0, 1.0], abs=1e-15)

    def test_negative_induction_rejected(self):
        with pytest.raises(ValidationError):
            DynamicsConfig(k_i=-0.1)


class TestRates:
    """Right-hand side of the equations of motion."""

    @pytest.fixture
    def isolated(self):
        """Electron with both internal fields switched off."""
        return dict(include_b_n=False, include_b_e=False, hold_nucleus=True)

    def test_larmor_precession(self, isolated):
        atom = potassium39()
        rates = cqd_rhs(SpinState(1.0, 0.0, 2.0, 0.0), (0.0, 0.0, 1e-4), atom,
                        DynamicsConfig(physics=Physics.BLOCH, **isolated))
        assert rates[0] == 0.0
        assert rates[1] == pytest.approx(-atom.gamma_e * 1e-4)

    def test_pole_has_no_azimuthal_rate(self, isolated):
        rates = cqd_rhs(SpinState(0.0, 0.0, 2.0, 0.0), (0.0, 0.0, 1e-4), potassium39(),
                        DynamicsConfig(k_i=0.1, **isolated))
        assert rates[0] == 0.0
        assert rates[1] == 0.0

    def test_induction_moves_electron_away_from_nucleus(self, isolated):
        config = DynamicsConfig(k_i=0.01, **isolated)
        field = (0.0, 0.0, 1e-4)
        below = cqd_rhs(SpinState(1.0, 0.0, 2.0, 0.0), field, potassium39(), config)
        above = cqd_rhs(SpinState(1.0, 0.0, 0.5, 0.0), field, potassium39(), config)
        assert below[0] < 0.0
        assert above[0] > 0.0

    def test_held_nucleus_keeps_its_polar_angle(self):
        rates = cqd_rhs(SpinState(1.0, 0.0, 2.0, 0.5), (1e-4, 1e-4, 1e-4), potassium39(),
                        DynamicsConfig(k_i=0.01, hold_nucleus=True))
        assert rates[2] == 0.0


class TestCollapse:
    """Branch selection, envelope and collapse times."""

    def test_branch(self):
        assert branch(2.0, 1.0) == 1
        assert branch(0.5, 1.0) == -1
        assert branch(1.0, 1.0) == 0

    def test_branch_domain(self):
        with pytest.raises(DomainError):
            branch(4.0, 1.0)

    def test_envelope_after_one_efold(self):
        k = 0.05
        assert collapse_envelope(math.pi / 2, k, 1.0 / k, 1) == pytest.approx(
            2.0 * math.atan(math.exp(-1.0)), rel=1e-12)
        assert collapse_envelope(math.pi / 2, k, 1.0 / k, -1) == pytest.approx(
            2.0 * math.atan(math.e), rel=1e-12)

    def test_envelope_without_induction_is_static(self):
        assert collapse_envelope(1.2, 0.0, 100.0, 1) == pytest.approx(1.2)

    def test_envelope_domain(self):
        with pytest.raises(DomainError):
            collapse_envelope(0.0, 0.1, 1.0, 1)

    def test_collapse_times(self):
        atom = potassium39()
        n_c, t_electron = collapse_times(7.4e-4, atom.gamma_e * 0.3)
        assert n_c == pytest.approx(215.07, rel=1e-4)
        assert t_electron == pytest.approx(2.558e-8, rel=1e-3)
        _, t_nucleus = collapse_times(7.4e-4, atom.gamma_n * 0.3)
        assert t_nucleus == pytest.approx(3.604e-4, rel=1e-3)

    def test_no_induction_never_collapses(self):
        assert collapse_times(0.0, 1e7) == (math.inf, math.inf)


class TestIntegrateSpin:
    """Adaptive integration of single trajectories."""

    @pytest.fixture
    def isolated(self):
        """CQD physics with the nucleus held and internal fields off."""
        return dict(include_b_n=False, include_b_e=False, hold_nucleus=True)

    def test_constant_field_without_induction_keeps_polar_angle(self, isolated):
        config = DynamicsConfig(physics=Physics.CQD, k_i=0.0, **isolated)
        trajectory = integrate_spin(SpinState(1.1, 0.3, 2.0, 0.0), constant_field(1e-4),
                                    (0.0, 2e-6), config)
        assert np.max(np.abs(trajectory.theta_e - 1.1)) < 1e-7

    @pytest.mark.slow
    def test_polar_angle_follows_collapse_envelope(self, isolated):
        k = 1e-3
        config = DynamicsConfig(k_i=k, **isolated)
        t_eval = np.linspace(0.0, 1.75e-4, 8)
        trajectory = integrate_spin(SpinState(math.pi / 2, 0.0, math.pi, 0.0),
                                    constant_field(1e-4), (0.0, 1.75e-4), config, t_eval=t_eval)
        expected = np.exp(-k * trajectory.phase_e)
        assert np.tan(trajectory.theta_e / 2.0) == pytest.approx(expected, rel=1e-2)
        assert trajectory.final.theta_e < 0.2

    def test_llg_and_cqd_agree_when_nucleus_is_below(self, isolated):
        state = SpinState(1.0, 0.0, 2.0, 0.0)
        for physics in (Physics.LLG, Physics.CQD):
            config = DynamicsConfig(physics=physics, k_i=0.01, **isolated)
            final = integrate_spin(state, constant_field(-1e-4), (0.0, 1.7e-5), config).final
            assert final.theta_e < 1.0

    def test_llg_and_cqd_disagree_when_nucleus_is_above(self, isolated):
        state = SpinState(1.0, 0.0, 0.5, 0.0)
        llg = integrate_spin(state, constant_field(-1e-4), (0.0, 1.7e-5),
                             DynamicsConfig(physics=Physics.LLG, k_i=0.01, **isolated)).final
        cqd = integrate_spin(state, constant_field(-1e-4), (0.0, 1.7e-5),
                             DynamicsConfig(physics=Physics.CQD, k_i=0.01, **isolated)).final
        assert llg.theta_e < 1.0
        assert cqd.theta_e > 1.0

    def test_non_positive_tolerance_rejected(self):
        with pytest.raises(DomainError):
            integrate_spin(SpinState(1.0, 0.0, 2.0, 0.0), constant_field(1e-4), (0.0, 1e-6), tol=0.0)

    @pytest.mark.parametrize("k0", [0.25, 1.0])
    def test_bloch_limit_matches_two_level_amplitudes(self, k0):
        atom = potassium39()
        gradient, v = 1.0, 800.0
        a = majorana_tau_scale(atom.gamma_e, gradient, v)
        b_y = 2.0 * a * math.sqrt(k0) / abs(atom.gamma_e)
        tau_max = default_tau_max(k0, 0.0)
        config = DynamicsConfig(physics=Physics.BLOCH, include_b_n=False, include_b_e=False)

        trajectory = integrate_spin(SpinState(0.3, 1.0, math.pi / 2, 0.0),
                                    lambda t: (0.0, b_y, gradient * v * t),
                                    (-tau_max / a, tau_max / a), config, tol=1e-10, atom=atom)
        amplitudes = integrate_two_level(k0, 0.0, tau_max=tau_max,
                                         initial=amplitudes_from_angles(0.3, 1.0, -tau_max),
                                         tail_correction=False)
        assert amplitudes.polar_cosine() == pytest.approx(math.cos(trajectory.final.theta_e), abs=1e-3)


class TestIntegrateEnsemble:
    """Many trajectories sharing one field."""

    @pytest.mark.slow
    def test_collapse_direction_matches_branch(self):
        rng = np.random.default_rng(2024)
        states = []
        while len(states) < 1000:
            theta_e, theta_n = rng.uniform(0.05, math.pi - 0.05, size=2)
            if abs(theta_n - theta_e) < 1e-6:
                continue
            states.append(SpinState(theta_e, rng.uniform(0.0, 2.0 * math.pi), theta_n, 0.0))
        config = DynamicsConfig(k_i=0.01, include_b_n=False, include_b_e=False, hold_nucleus=True)
        finals = integrate_ensemble(states, constant_field(1e-4), (0.0, 1.14e-5), config)

        for initial, final in zip(states, finals):
            moved = np.sign(initial.theta_e - final.theta_e)
            assert moved == branch(initial.theta_n, initial.theta_e)

    def test_empty_ensemble(self):
        assert integrate_ensemble([], constant_field(1e-4), (0.0, 1e-6)) == []

    def test_matches_single_trajectories(self):
        config = DynamicsConfig(k_i=0.01, include_b_n=False, include_b_e=False, hold_nucleus=True)
        states = [SpinState(1.0, 0.0, 2.0, 0.0), SpinState(2.0, 1.0, 0.5, 0.0)]
        finals = integrate_ensemble(states, constant_field(1e-4), (0.0, 2e-6), config)
        for state, final in zip(states, finals):
            single = integrate_spin(state, constant_field(1e-4), (0.0, 2e-6), config).final
            assert final.theta_e == pytest.approx(single.theta_e, abs=1e-5)


class TestTwoLevel:
    """Amplitude equations against the Landau-Zener closed form."""

    @pytest.mark.parametrize("k0", [0.1, 0.5, 1.0, 2.0])
    def test_majorana_stay_probability(self, k0):
        pair = integrate_two_level(k0)
        assert pair.stay_probability == pytest.approx(math.exp(-math.pi * k0 / 2.0), rel=2e-2)
        assert pair.norm == pytest.approx(1.0, abs=1e-5)

    def test_resonant_rotation(self):
        pair = integrate_two_level(0.0, 0.5, 0.0, 20.0)
        assert pair.stay_probability == pytest.approx(math.exp(-math.pi * 0.5 / 2.0), rel=5e-2)

    def test_no_coupling_keeps_initial_state(self):
        pair = integrate_two_level(0.0, 0.0)
        assert pair.stay_probability == pytest.approx(1.0)
        assert pair.polar_cosine() == pytest.approx(1.0)

    def test_initial_amplitudes(self):
        f, g = amplitudes_from_angles(math.pi / 2, 0.0, 0.0)
        assert abs(f) ** 2 == pytest.approx(0.5)
        assert abs(g) ** 2 == pytest.approx(0.5)

    def test_invalid_arguments_rejected(self):
        with pytest.raises(DomainError):
            integrate_two_level(-1.0)
        with pytest.raises(DomainError):
            integrate_two_level(1.0, tau_max=2.0)

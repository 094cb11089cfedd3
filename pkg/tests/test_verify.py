"""
Tests for the quantum cross-checks and the verifier that runs them.
"""

import math

import numpy as np
import pytest

from cqd.errors import DomainError
from cqd.verify import (
    CheckLevel,
    CheckResult,
    CheckStrategy,
    EntangledPair,
    UNDETERMINED,
    Verifier,
    create_identity_verifier,
    create_quantum_verifier,
    entangle_mc,
    entangled_outcomes,
    second_axis,
    two_stage_cqd,
    two_stage_mc,
    two_stage_probability,
    two_stage_quadrature,
    uncertainty_grid,
    uncertainty_suite,
    x_split_after_z,
    x_split_mc,
)
from cqd.verify.strategies import DEFAULT_SIGMAS, EntanglementCheck, TwoStageMonteCarloCheck, XSplitCheck

SIGMAS = 4.5


class TestUncertainty:
    """Sequential z-then-x measurements."""

    def test_equality_holds_on_grid(self):
        records = uncertainty_grid(40)
        assert len(records) == 1600
        assert max(record.residual for record in records) <= 1e-12
        assert all(record.inequality_holds for record in records)

    def test_spreads_at_equator(self):
        record = uncertainty_suite(math.pi / 2, math.pi / 2)
        assert record.delta_sz == pytest.approx(1.0)
        assert record.delta_sx == pytest.approx(1.0)
        assert abs(record.s_y_exp) == pytest.approx(1.0)

    def test_pole_has_no_z_spread(self):
        assert uncertainty_suite(0.0, 1.0).delta_sz == pytest.approx(0.0, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            uncertainty_suite(-0.1, 0.0)
        with pytest.raises(DomainError):
            uncertainty_grid(1)


class TestXSplit:
    """x measurement after a z collapse."""

    @pytest.mark.parametrize("branch", [1, -1])
    def test_even_split(self, branch):
        plus, minus = x_split_after_z(branch)
        assert plus == pytest.approx(0.5, abs=1e-9)
        assert plus + minus == pytest.approx(1.0)

    @pytest.mark.parametrize("branch", [1, -1])
    def test_sampled_split(self, branch):
        assert x_split_mc(branch, 100000, seed=1).within(0.5, SIGMAS)

    def test_branch_must_be_signed(self):
        with pytest.raises(DomainError):
            x_split_after_z(0)


class TestTwoStage:
    """Tilted second-stage measurement after +z selection."""

    def test_sixty_degrees(self):
        result = two_stage_probability(math.pi / 3)
        assert result.p_cqd == pytest.approx(0.84375)
        assert result.p_qm == pytest.approx(0.75)
        assert result.ratio == pytest.approx(1.125)
        assert result.ratio_closed_form == pytest.approx(1.125)

    def test_near_antiparallel(self):
        alpha = 11.0 * math.pi / 12.0
        result = two_stage_probability(alpha)
        assert result.p_cqd == pytest.approx(8.607e-4, rel=1e-3)
        assert result.ratio == pytest.approx(result.ratio_closed_form, rel=1e-9)

    def test_untilted_stage_passes_everything(self):
        result = two_stage_probability(0.0)
        assert result.p_cqd == pytest.approx(1.0)
        assert result.ratio == pytest.approx(1.0)

    def test_antiparallel_rejected(self):
        with pytest.raises(DomainError):
            two_stage_probability(math.pi)

    def test_second_axis(self):
        assert second_axis(math.pi / 2) == pytest.approx([1.0, 0.0, 0.0], abs=1e-15)
        assert second_axis(0.0) == pytest.approx([0.0, 0.0, 1.0])

    @pytest.mark.parametrize("alpha", [0.3, math.pi / 3, 1.5, 2.5, 3.0])
    def test_quadrature_matches_closed_form(self, alpha):
        assert two_stage_quadrature(alpha) == pytest.approx(two_stage_cqd(alpha), abs=1e-6)

    @pytest.mark.parametrize("alpha", [math.pi / 4, math.pi / 2, 2.0])
    def test_monte_carlo_matches_closed_form(self, alpha):
        estimate = two_stage_mc(alpha, 100000, seed=17)
        assert estimate.within(two_stage_cqd(alpha), SIGMAS)

    def test_monte_carlo_attached_on_request(self):
        result = two_stage_probability(1.0, mc_samples=20000, seed=2)
        assert result.mc is not None
        assert result.mc.n == 20000

    def test_too_few_samples_rejected(self):
        with pytest.raises(DomainError):
            two_stage_mc(1.0, 5000)


class TestEntanglement:
    """Branches of antiparallel and parallel atom pairs."""

    def test_antiparallel_pair_collapses_oppositely(self):
        outcome = entangled_outcomes(EntangledPair(0.5, 0.2, 2.0, 1.0))
        assert outcome == (1, -1)

    def test_parallel_pair_collapses_together(self):
        outcome = entangled_outcomes(EntangledPair(0.5, 0.2, 2.0, 1.0, correlated=True))
        assert outcome == (1, 1)

    def test_tie_is_undetermined(self):
        outcome = entangled_outcomes(EntangledPair(1.0, 0.3, 1.0, 0.3))
        assert outcome == UNDETERMINED
        assert outcome.undetermined

    def test_axis_is_normalized(self):
        pair = EntangledPair(0.5, 0.0, 2.0, 0.0, quant_axis=(0.0, 0.0, 3.0))
        assert pair.quant_axis == pytest.approx((0.0, 0.0, 1.0))
        with pytest.raises(DomainError):
            EntangledPair(0.5, 0.0, 2.0, 0.0, quant_axis=(0.0, 0.0, 0.0))

    @pytest.mark.parametrize("correlated", [False, True])
    def test_pairing_always_holds(self, correlated):
        summary = entangle_mc(50000, seed=6, correlated=correlated)
        assert summary.prediction_holds_fraction == 1.0
        assert abs(summary.p_branch1_plus - 0.5) <= SIGMAS * summary.stderr


class AlwaysFails(CheckStrategy):
    def check(self, context):
        return CheckResult(self.name, False, CheckLevel.IDENTITY, ["nope"])


class Explodes(CheckStrategy):
    def check(self, context):
        raise RuntimeError("boom")


class TestVerifier:
    """Running checks as a suite."""

    def test_identity_suite_passes(self):
        report = create_identity_verifier().run({"seed": 0}, max_level=CheckLevel.IDENTITY)
        assert report.passed, [result.errors for result in report.failed()]
        assert {result.level for result in report.results} == {CheckLevel.IDENTITY}

    def test_identity_suite_has_no_sampling_checks(self):
        identity = create_identity_verifier().strategies
        assert identity[CheckLevel.STATISTICAL] == []
        assert not any(isinstance(s, EntanglementCheck) for s in identity[CheckLevel.IDENTITY])

    def test_quantum_suite_samples_at_the_statistical_tier(self):
        strategies = create_quantum_verifier(samples=5000).strategies
        sampling = strategies[CheckLevel.STATISTICAL]
        assert sum(isinstance(s, EntanglementCheck) for s in sampling) == 2
        assert not any(isinstance(s, EntanglementCheck) for s in strategies[CheckLevel.IDENTITY])
        tolerances = [s.sigmas for s in sampling if isinstance(s, (XSplitCheck, TwoStageMonteCarloCheck))]
        assert tolerances == [DEFAULT_SIGMAS, DEFAULT_SIGMAS]
        assert DEFAULT_SIGMAS == 5.0

    def test_entanglement_check_reports_statistical_level(self):
        result = EntanglementCheck(pairs=2000).check({"seed": 1})
        assert result.passed
        assert result.level == CheckLevel.STATISTICAL

    @pytest.mark.slow
    def test_statistical_checks_pass(self):
        verifier = Verifier()
        verifier.register_strategy(CheckLevel.STATISTICAL, XSplitCheck(100000))
        verifier.register_strategy(CheckLevel.STATISTICAL,
                                   TwoStageMonteCarloCheck(samples=100000))
        report = verifier.run({"seed": 0})
        assert report.passed, [result.errors for result in report.failed()]

    def test_failures_and_exceptions_are_reported(self):
        verifier = Verifier()
        verifier.register_strategy(CheckLevel.IDENTITY, AlwaysFails())
        verifier.register_strategy(CheckLevel.IDENTITY, Explodes())
        report = verifier.run()
        assert not report.passed
        assert [result.name for result in report.failed()] == ["AlwaysFails", "Explodes"]
        assert "boom" in report.failed()[1].errors[0]

    def test_max_level_skips_statistical_checks(self):
        verifier = Verifier()
        verifier.register_strategy(CheckLevel.STATISTICAL, AlwaysFails())
        report = verifier.run(max_level=CheckLevel.IDENTITY)
        assert report.passed
        assert report.results == []

    def test_summary_and_stats(self):
        verifier = Verifier()
        verifier.register_strategy(CheckLevel.IDENTITY, AlwaysFails())
        summary = verifier.run().summary()
        assert summary.passed is False
        assert summary.checks[0]["errors"] == ["nope"]
        assert verifier.get_stats()["total_runs"] == 1
        assert verifier.get_stats()["pass_rate"] == 0.0

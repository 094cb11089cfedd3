"""
Tests for co-quantum distributions, seeded sampling and density operators.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from cqd.ensemble import (
    CHUNK_SIZE,
    DensityMatrix2,
    StreamLayout,
    by_name,
    cross_term_mc,
    custom_distribution,
    density_operator,
    flip_probability,
    flip_probability_mc,
    heart,
    heart_pdf,
    heart_inverted,
    isotropic,
    make_generator,
    mean_theta_mc,
    mixed_density,
    mixed_density_mc,
    sample,
    slit_reshape,
    wavefunction,
)
from cqd.errors import DomainError
from cqd.models import DistributionKind

SIGMAS = 4.5


class TestDistributions:
    """Closed-form distributions on the sphere."""

    @pytest.mark.parametrize("factory", [isotropic, heart, heart_inverted])
    def test_pdf_is_normalized(self, factory):
        dist = factory()
        total = quad(lambda t: float(dist.pdf(t)) * 2.0 * math.pi * math.sin(t), 0.0, math.pi)[0]
        assert total == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.parametrize("factory, expected", [
        (isotropic, 0.5),
        (heart, 0.25),
        (heart_inverted, 0.75),
    ])
    def test_cdf_at_equator(self, factory, expected):
        assert factory().cdf(math.pi / 2) == pytest.approx(expected)

    def test_heart_lower_hemisphere_by_quadrature(self):
        mass = quad(lambda t: float(heart_pdf(t)) * 2.0 * math.pi * math.sin(t), 0.0, math.pi / 2.0)[0]
        assert mass == pytest.approx(0.25, rel=1e-10)

    @pytest.mark.parametrize("factory", [isotropic, heart, heart_inverted])
    def test_inverse_cdf(self, factory):
        dist = factory()
        theta = np.linspace(0.1, math.pi - 0.1, 25)
        assert dist.inverse_cdf(dist.cdf(theta)) == pytest.approx(theta, abs=1e-9)

    def test_heart_mean_angle(self):
        assert heart().mean_theta() == pytest.approx(5.0 * math.pi / 8.0, rel=1e-9)

    def test_polar_angle_domain(self):
        with pytest.raises(DomainError):
            isotropic().cdf(4.0)

    def test_by_name(self):
        assert by_name("iso").kind == DistributionKind.ISOTROPIC
        assert by_name("Heart").kind == DistributionKind.HEART
        assert by_name("heart-inverted").kind == DistributionKind.HEART_INVERTED
        with pytest.raises(DomainError):
            by_name("uniform")


class TestCustomDistribution:
    """Tabulated polar CDFs."""

    def test_reproduces_isotropic(self):
        grid = np.linspace(0.0, math.pi, 501)
        dist = custom_distribution(grid, np.sin(grid / 2.0) ** 2)
        assert dist.cdf(1.0) == pytest.approx(math.sin(0.5) ** 2, abs=1e-6)
        assert dist.pdf(1.0) == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-3)
        assert dist.inverse_cdf(0.5) == pytest.approx(math.pi / 2, abs=1e-4)

    def test_grid_must_span_the_sphere(self):
        grid = np.linspace(0.0, 3.0, 10)
        with pytest.raises(DomainError):
            custom_distribution(grid, np.linspace(0.0, 1.0, 10))

    def test_cdf_must_be_non_decreasing(self):
        grid = np.linspace(0.0, math.pi, 5)
        with pytest.raises(DomainError):
            custom_distribution(grid, [0.0, 0.6, 0.4, 0.8, 1.0])

    def test_cdf_must_end_at_one(self):
        grid = np.linspace(0.0, math.pi, 5)
        with pytest.raises(DomainError):
            custom_distribution(grid, [0.0, 0.2, 0.4, 0.6, 0.9])


class TestSlitReshape:
    """Co-quantum distribution after selecting one branch."""

    def test_isotropic_electrons_give_heart_shapes(self):
        assert slit_reshape(isotropic(), isotropic(), 1).kind == DistributionKind.HEART
        assert slit_reshape(isotropic(), isotropic(), -1).kind == DistributionKind.HEART_INVERTED

    def test_heart_electrons_reshape_further(self):
        reshaped = slit_reshape(isotropic(), heart(), 1)
        assert reshaped.kind == DistributionKind.CUSTOM
        assert reshaped.cdf(math.pi / 2) == pytest.approx(0.125, abs=1e-4)
        assert reshaped.cdf(math.pi) == pytest.approx(1.0)

    def test_non_isotropic_prior_rejected(self):
        with pytest.raises(DomainError):
            slit_reshape(heart(), isotropic(), 1)

    def test_branch_must_be_signed(self):
        with pytest.raises(DomainError):
            slit_reshape(isotropic(), isotropic(), 0)


class TestSampling:
    """Seeded Philox streams and chunked reductions."""

    def test_chunk_sizes(self):
        layout = StreamLayout(7, "test")
        assert layout.chunk_sizes(2 * CHUNK_SIZE + 5) == [CHUNK_SIZE, CHUNK_SIZE, 5]
        assert layout.chunk_sizes(CHUNK_SIZE) == [CHUNK_SIZE]

    def test_seed_range(self):
        with pytest.raises(DomainError):
            StreamLayout(-1, "test")
        with pytest.raises(DomainError):
            StreamLayout(2 ** 64, "test")

    def test_streams_are_reproducible_and_distinct(self):
        first = make_generator(42, "a").random(5)
        assert np.array_equal(first, make_generator(42, "a").random(5))
        assert not np.array_equal(first, make_generator(42, "b").random(5))
        assert not np.array_equal(first, make_generator(42, "a", chunk=1).random(5))

    def test_samples_lie_on_the_sphere(self):
        theta, phi = sample(heart(), make_generator(1, "bounds"), 10000)
        assert np.all((theta >= 0.0) & (theta <= math.pi))
        assert np.all((phi >= 0.0) & (phi < 2.0 * math.pi))

    def test_result_is_independent_of_worker_count(self):
        n = 3 * CHUNK_SIZE + 17
        single = flip_probability_mc(1.0, isotropic(), n, seed=99, workers=1)
        pooled = flip_probability_mc(1.0, isotropic(), n, seed=99, workers=4)
        assert single.estimate == pooled.estimate

    @pytest.mark.parametrize("factory", [isotropic, heart, heart_inverted])
    def test_flip_probability_matches_cdf(self, factory):
        dist = factory()
        estimate = flip_probability_mc(2.0, dist, 200000, seed=5)
        assert estimate.analytic == pytest.approx(flip_probability(2.0, dist))
        assert estimate.within(estimate.analytic, sigmas=SIGMAS)

    @pytest.mark.parametrize("index", range(1, 21))
    @pytest.mark.parametrize("factory, power", [(isotropic, 2), (heart, 4)])
    def test_flip_fraction_across_electron_angles(self, factory, power, index):
        """sin^2(theta_e/2) for isotropic co-quanta, sin^4(theta_e/2) for the heart shape."""
        theta_e = index * math.pi / 21.0
        expected = math.sin(theta_e / 2.0) ** power
        estimate = flip_probability_mc(theta_e, factory(), 100_000, seed=index)
        assert estimate.analytic == pytest.approx(expected, rel=1e-9)
        binomial_stderr = math.sqrt(expected * (1.0 - expected) / estimate.n)
        assert abs(estimate.estimate - expected) <= SIGMAS * binomial_stderr

    def test_heart_lower_hemisphere_sampled(self):
        n = 100_000
        theta, _ = sample(heart(), make_generator(17, "hemisphere"), n)
        fraction = np.count_nonzero(theta < math.pi / 2.0) / n
        assert abs(fraction - 0.25) <= SIGMAS * math.sqrt(0.25 * 0.75 / n)

    def test_heart_mean_angle_sampled(self):
        estimate = mean_theta_mc(heart(), 200000, seed=11)
        assert estimate.within(5.0 * math.pi / 8.0, sigmas=SIGMAS)

    def test_too_few_samples_rejected(self):
        with pytest.raises(DomainError):
            flip_probability_mc(1.0, isotropic(), 999)


class TestDensityOperators:
    """Pre-averaging operators and their ensemble averages."""

    def test_operator_is_pure(self):
        rho = density_operator(1.2, 0.7)
        assert rho.trace == pytest.approx(1.0)
        assert rho.det == pytest.approx(0.0, abs=1e-12)
        assert rho.is_pure()

    def test_operator_at_equator(self):
        rho = density_operator(math.pi / 2, 0.0)
        assert rho[0, 0].real == pytest.approx(0.5)
        assert rho[0, 1].real == pytest.approx(0.5)

    def test_wavefunction_matches_operator(self):
        plus, minus = wavefunction(2.0, 0.4)
        rho = density_operator(2.0, 0.4)
        outer = np.outer([plus, minus], np.conj([plus, minus]))
        assert np.allclose(outer, rho.matrix, atol=1e-12)

    def test_invalid_matrices_rejected(self):
        with pytest.raises(DomainError):
            DensityMatrix2(np.eye(2))
        with pytest.raises(DomainError):
            DensityMatrix2(np.array([[0.5, 0.1], [0.2, 0.5]]))
        with pytest.raises(DomainError):
            DensityMatrix2(np.array([[1.5, 0.0], [0.0, -0.5]]))

    def test_isotropic_mixture_is_maximally_mixed(self):
        rho = mixed_density(isotropic())
        assert np.allclose(rho.matrix, np.eye(2) / 2.0, atol=1e-9)
        assert rho.purity == pytest.approx(0.5)

    def test_mixture_requires_isotropic_electrons(self):
        with pytest.raises(DomainError):
            mixed_density(heart())

    def test_sampled_mixture_matches_quadrature(self):
        rho, stderr = mixed_density_mc(200000, seed=8)
        exact = mixed_density(isotropic())
        assert abs(rho[1, 1] - exact[1, 1]) <= SIGMAS * stderr[1, 1]
        assert abs(rho[0, 1] - exact[0, 1]) <= SIGMAS * stderr[0, 1]

    def test_same_realization_indicators_never_coincide(self):
        estimate = cross_term_mc(isotropic(), 1.3, 20000, seed=4, identical=True)
        assert estimate.estimate == 0.0

    def test_independent_realizations_factorize(self):
        estimate = cross_term_mc(isotropic(), 1.3, 200000, seed=4, identical=False)
        assert estimate.within(estimate.analytic, sigmas=SIGMAS)

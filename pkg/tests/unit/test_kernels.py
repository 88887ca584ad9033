import math

import numpy as np
import pytest

from povmlab.models.kernels import (
    BinomialKernel, ConvolutionKernel, GaussianKernel, KernelError, KernelWeight,
    binomial_kernel, continuity_modulus, convolution_kernel, gaussian_kernel,
    kernel_axiom_report, mixture_kernel, point_kernel,
)
from povmlab.models.sets import CircleSet, LineSet, NatSet, SetKind
from povmlab.parsers.spec_parser import SpecParser


class TestGaussianKernel:
    """Tests for the Gaussian kernel."""

    def test_half_line_at_center(self):
        """Test μ_(-inf,0)(0) = 1/2."""
        assert gaussian_kernel(1.0).evaluate(0.0, LineSet.interval(-math.inf, 0.0)) == pytest.approx(0.5)

    def test_symmetric_interval(self):
        """Test the one-sigma mass."""
        value = gaussian_kernel(1.0).evaluate(0.0, LineSet.interval(-1.0, 1.0))

        assert value == pytest.approx(0.6826894921370859, abs=1e-14)

    def test_width_scales_interval(self):
        """Test that a wider kernel spreads mass out."""
        narrow = gaussian_kernel(0.5).evaluate(0.0, LineSet.interval(-1.0, 1.0))
        wide = gaussian_kernel(2.0).evaluate(0.0, LineSet.interval(-1.0, 1.0))

        assert narrow > wide

    def test_points_carry_no_mass(self):
        """Test that singletons and punctures do not change values."""
        kernel = gaussian_kernel(1.0)

        assert kernel.evaluate(0.0, LineSet.singleton(0.0)) == 0.0
        assert kernel.evaluate(0.3, LineSet.open_interval(0, 1)) == kernel.evaluate(0.3, LineSet.interval(0, 1))

    def test_full_line(self):
        """Test normalization on the full line."""
        values = gaussian_kernel(1.0).evaluate_many(np.linspace(-100, 100, 11), LineSet.full())

        np.testing.assert_allclose(values, 1.0)

    def test_lipschitz_bound(self):
        """Test the analytic Lipschitz bound."""
        assert gaussian_kernel(1.0).lipschitz_bound(0.1) == pytest.approx(math.sqrt(2 / math.pi) * 0.1)

    def test_modulus_below_bound(self):
        """Test that the empirical modulus respects the analytic bound."""
        kernel = gaussian_kernel(1.0)
        result = continuity_modulus(kernel, LineSet.interval(0.0, 1.0), np.linspace(-4, 4, 161), 0.1)

        assert result.applicable is True
        assert result.pairs_checked > 0
        assert 0 < result.value <= kernel.lipschitz_bound(0.1)

    @pytest.mark.parametrize("width", [0.0, -1.0, math.inf])
    def test_invalid_width(self, width):
        """Test that the width must be positive and finite."""
        with pytest.raises(KernelError):
            GaussianKernel(width)

    def test_wrong_domain(self):
        """Test that circle sets are rejected."""
        with pytest.raises(KernelError):
            gaussian_kernel(1.0).evaluate(0.0, CircleSet.arc(0.0, 1.0))

    def test_non_finite_sharp_value(self):
        """Test that sharp values must be finite."""
        with pytest.raises(KernelError):
            gaussian_kernel(1.0).evaluate(math.inf, LineSet.interval(0, 1))


class TestBinomialKernel:
    """Tests for the binomial kernel."""

    def test_singleton(self):
        """Test μ_{1}(2) = 2·ε·(1 − ε)."""
        assert binomial_kernel(0.5).evaluate(2, NatSet.singleton(1)) == pytest.approx(0.5)

    def test_outcome_above_trials(self):
        """Test that n > m has zero mass."""
        assert binomial_kernel(0.5).evaluate(3, NatSet.singleton(5)) == 0.0

    def test_normalized(self):
        """Test that {0..m} and N both have mass one."""
        kernel = binomial_kernel(0.3)

        assert kernel.evaluate(4, NatSet.of(range(5))) == pytest.approx(1.0)
        assert kernel.evaluate(4, NatSet.full()) == 1.0

    def test_cofinite_complement(self):
        """Test μ of a cofinite set is 1 minus μ of its complement."""
        kernel = binomial_kernel(0.3)
        finite = kernel.evaluate(6, NatSet.of([0, 1]))

        assert kernel.evaluate(6, NatSet.of([0, 1], cofinite=True)) == pytest.approx(1.0 - finite)

    @pytest.mark.parametrize("eps", [0.0, 1.0, 1.5])
    def test_invalid_eps(self, eps):
        """Test that eps must lie in (0, 1)."""
        with pytest.raises(KernelError):
            BinomialKernel(eps)

    def test_non_integer_sharp_value(self):
        """Test that sharp values must be naturals."""
        with pytest.raises(KernelError):
            binomial_kernel(0.5).evaluate(1.5, NatSet.singleton(1))

    def test_line_set_rejected(self):
        """Test that line sets are rejected."""
        with pytest.raises(KernelError):
            binomial_kernel(0.5).evaluate(1, LineSet.interval(0, 1))

    def test_modulus_not_applicable(self):
        """Test that the modulus is not defined on the naturals."""
        result = continuity_modulus(binomial_kernel(0.5), NatSet.singleton(0), [0, 1, 2], 1.0)

        assert result.applicable is False


class TestConvolutionKernel:
    """Tests for the convolution kernel and its weights."""

    def test_full_line(self):
        """Test normalization on the full line."""
        assert convolution_kernel().evaluate(0.5, LineSet.full()) == pytest.approx(1.0)

    def test_default_weight_mass(self):
        """Test μ_[0,0.5)(1) = ∫_0.5^1 6y(1 − y) dy = 1/2."""
        assert convolution_kernel().evaluate(1.0, LineSet.interval(0.0, 0.5)) == pytest.approx(0.5)

    def test_uniform_weight(self):
        """Test the uniform weight."""
        kernel = ConvolutionKernel(KernelWeight.uniform())

        assert kernel.evaluate(0.5, LineSet.interval(0.0, 0.25)) == pytest.approx(0.25)

    def test_sharp_values_in_unit_interval(self):
        """Test that sharp values must lie in [0, 1]."""
        with pytest.raises(KernelError):
            convolution_kernel().evaluate(1.5, LineSet.interval(0, 1))

    def test_weight_must_integrate_to_one(self):
        """Test that an unnormalized weight is rejected."""
        with pytest.raises(KernelError):
            KernelWeight(lambda y: np.full_like(np.asarray(y, dtype=float), 2.0), 2.0)

    def test_weight_must_respect_bound(self):
        """Test that the bound M is checked."""
        with pytest.raises(KernelError):
            KernelWeight(lambda y: 6.0 * y * (1.0 - y), 1.0)

    def test_quadrature_fallback(self):
        """Test a weight without antiderivative."""
        weight = KernelWeight(lambda y: 2.0 * np.asarray(y, dtype=float), 2.0, name="ramp")

        assert weight.mass(0.0, 0.5) == pytest.approx(0.25, abs=1e-10)
        assert weight.mass(0.5, 0.5) == 0.0


class TestPointAndMixtureKernels:
    """Tests for the point and mixture kernels."""

    def test_point_kernel_indicator(self):
        """Test μ_Δ(λ) = χ_Δ(λ)."""
        kernel = point_kernel()

        assert kernel.evaluate(0.5, LineSet.interval(0, 1)) == 1.0
        assert kernel.evaluate(1.0, LineSet.interval(0, 1)) == 0.0
        assert kernel.evaluate(0.0, LineSet.open_interval(0, 1)) == 0.0
        assert kernel.evaluate(2.0, LineSet.singleton(2.0)) == 1.0

    def test_point_kernel_naturals(self):
        """Test the point kernel on the naturals."""
        kernel = point_kernel(SetKind.NATURALS)

        np.testing.assert_array_equal(kernel.evaluate_many([0, 1, 2], NatSet.of([1])), [0.0, 1.0, 0.0])

    def test_point_kernel_circle_range(self):
        """Test that circle values must lie in [0, 2*pi)."""
        with pytest.raises(KernelError):
            point_kernel(SetKind.CIRCLE).evaluate(7.0, CircleSet.arc(0.0, 1.0))

    def test_mixture(self):
        """Test a convex combination of two kernels."""
        gaussian = gaussian_kernel(1.0)
        kernel = mixture_kernel([gaussian, point_kernel()], [0.5, 0.5])
        delta = LineSet.interval(0.0, 1.0)

        expected = 0.5 * gaussian.evaluate(0.0, delta) + 0.5
        assert kernel.evaluate(0.0, delta) == pytest.approx(expected)

    def test_mixture_weights_checked(self):
        """Test that weights must sum to one."""
        with pytest.raises(KernelError):
            mixture_kernel([gaussian_kernel(1.0), point_kernel()], [0.5, 0.6])

    def test_mixture_domains_checked(self):
        """Test that components must share their domains."""
        with pytest.raises(KernelError):
            mixture_kernel([gaussian_kernel(1.0), binomial_kernel(0.5)], [0.5, 0.5])


class TestKernelAxioms:
    """Tests for kernel_axiom_report."""

    def test_gaussian_passes(self):
        """Test the Gaussian kernel on a line partition."""
        partition = SpecParser().parse_partition("grid:lower=-2,upper=2,cells=8", SetKind.LINE)
        report = kernel_axiom_report(gaussian_kernel(1.0), np.linspace(-3, 3, 13), partition)

        assert report.passed is True
        assert report.normalization_error <= 1e-9

    def test_binomial_passes(self):
        """Test the binomial kernel on a naturals partition."""
        partition = [NatSet.of([0, 1, 2]), NatSet.of([0, 1, 2], cofinite=True)]
        report = kernel_axiom_report(binomial_kernel(0.4), np.arange(6), partition)

        assert report.passed is True

    def test_convolution_passes(self):
        """Test the convolution kernel on the unit interval."""
        partition = SpecParser().parse_partition("grid:lower=-1,upper=1,cells=10", SetKind.LINE)
        report = kernel_axiom_report(convolution_kernel(), np.linspace(0, 1, 11), partition)

        assert report.passed is True

    def test_overlapping_partition(self):
        """Test that overlapping cells are rejected."""
        partition = [LineSet.interval(-math.inf, 1.0), LineSet.interval(0.0, math.inf)]

        with pytest.raises(KernelError):
            kernel_axiom_report(gaussian_kernel(1.0), [0.0], partition)

    def test_partition_must_cover(self):
        """Test that cells must cover the outcome domain."""
        partition = [LineSet.interval(0.0, 1.0)]

        with pytest.raises(KernelError):
            kernel_axiom_report(gaussian_kernel(1.0), [0.0], partition)


class TestKernelProperties:
    """Structural identities every kernel should satisfy."""

    @pytest.mark.parametrize("kernel", [gaussian_kernel(0.7), convolution_kernel(), point_kernel()])
    def test_monotone_under_inclusion(self, kernel):
        """Test Δ ⊆ Δ' implies μ_Δ ≤ μ_Δ'."""
        lams = np.linspace(0.0, 1.0, 21)
        inner = LineSet.interval(0.2, 0.6)
        outer = LineSet.interval(-0.5, 0.9)

        assert np.all(kernel.evaluate_many(lams, inner) <= kernel.evaluate_many(lams, outer) + 1e-15)

    def test_binomial_monotone_under_inclusion(self):
        """Test monotonicity on sets of naturals."""
        kernel = binomial_kernel(0.4)
        lams = np.arange(15)
        inner = NatSet.of([1, 2])
        outer = NatSet.of([0, 1, 2, 3])

        assert np.all(kernel.evaluate_many(lams, inner) <= kernel.evaluate_many(lams, outer) + 1e-15)

    @pytest.mark.parametrize("shift", [-2.5, 0.3, 4.0])
    def test_gaussian_translation_covariance(self, shift):
        """Test μ_{Δ+t}(x + t) = μ_Δ(x)."""
        kernel = gaussian_kernel(1.3)
        lams = np.linspace(-2.0, 2.0, 9)
        delta = LineSet.interval(-0.5, 1.0)
        moved = LineSet.interval(-0.5 + shift, 1.0 + shift)

        np.testing.assert_allclose(kernel.evaluate_many(lams + shift, moved),
                                   kernel.evaluate_many(lams, delta), atol=1e-12)

    @pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
    def test_binomial_mean(self, eps):
        """Test Σ_n n·μ_{n}(m) = εm."""
        kernel = binomial_kernel(eps)
        for m in (0, 1, 7, 30):
            mean = sum(n * kernel.evaluate(m, NatSet.singleton(n)) for n in range(m + 1))

            assert mean == pytest.approx(eps * m, abs=1e-10)

    def test_convolution_bound(self):
        """Test μ_Δ(x) ≤ M·|Δ ∩ [x − 1, x]| for the default weight."""
        weight = KernelWeight.default()
        kernel = convolution_kernel(weight)
        for a, b in [(0.1, 0.3), (-0.4, 0.05), (0.45, 0.5), (0.0, 1.0)]:
            delta = LineSet.interval(a, b)
            for x in np.linspace(0.0, 1.0, 11):
                overlap = max(0.0, min(b, x) - max(a, x - 1.0))

                assert kernel.evaluate(x, delta) <= weight.bound * overlap + 1e-12

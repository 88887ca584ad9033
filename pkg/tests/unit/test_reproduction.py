from unittest.mock import patch

import pytest

from povmlab.models.reports import ClaimStatus, ScalingReport, Verdict
from povmlab.services.analyzer_service import POVMAnalyzer
from povmlab.services.reproduction_service import CLAIMS, ReproductionError, ReproductionService


class TestReproductionService:
    """Tests for the claims table rows that run in well under a second."""

    def setup_method(self):
        """Set up test fixtures."""
        self.service = ReproductionService(seed=12345)

    def test_every_row_has_a_claim(self):
        """Test that rows and claims line up."""
        assert sorted(self.service.rows()) == sorted(CLAIMS) == list(range(1, 13))

    def test_rows_in_order(self):
        """Test that selected rows come back sorted."""
        table = self.service.run(only=[12, 2])

        assert [row.row for row in table.rows] == [2, 12]
        assert table.seed == 12345
        assert table.parameters["eps"] == 0.5

    def test_binomial_normalization(self):
        """Test the binomial kernel normalization row."""
        row = self.service.run(only=[2]).rows[0]

        assert row.status == ClaimStatus.PASS.value
        assert set(row.measured["max_normalization_error"]) == {"eps=0.1", "eps=0.5", "eps=0.9"}

    def test_number_norm1(self):
        """Test that only F({0}) reaches norm one."""
        row = self.service.run(only=[3]).rows[0]

        assert row.status == ClaimStatus.PASS.value
        assert row.measured["norm_F0"] == pytest.approx(1.0)
        assert max(row.measured["max_eigenvalues"]) < 1.0

    def test_number_compactness_small_dims(self):
        """Test the residual norms at small truncations."""
        service = ReproductionService(seed=12345, dims=[10, 20, 40])

        row = service.run(only=[4]).rows[0]

        assert row.status == ClaimStatus.PASS.value
        assert row.measured["verdict"] == "obstruction"
        assert row.measured["oracle_error"] <= 1e-12

    def test_phase_covariance(self):
        """Test the covariance row."""
        row = self.service.run(only=[7]).rows[0]

        assert row.status == ClaimStatus.PASS.value
        assert set(row.measured["max_deviation"]) == {"phase-e1", "phase-can"}

    def test_e1_noncommutative(self):
        """Test the commutator of two overlapping half circles."""
        row = self.service.run(only=[12]).rows[0]

        assert row.status == ClaimStatus.PASS.value
        assert row.measured["commutator_norm"] == pytest.approx(0.0507, abs=1e-3)

    def test_single_dimension_is_inconclusive(self):
        """Test that one dimension cannot show a trend."""
        service = ReproductionService(seed=12345, dims=[20])

        row = service.run(only=[4]).rows[0]

        assert row.status == ClaimStatus.INCONCLUSIVE.value
        assert row.note == "insufficient dimensions"

    def test_unknown_row(self):
        """Test that unknown rows are rejected."""
        with pytest.raises(ReproductionError):
            self.service.run(only=[13])

    def test_rising_norms_below_obstruction_fail(self):
        """Test that norms which rise but stay under 0.9 fail the phase row."""
        report = ScalingReport(probe="norm of circ:[0,0.1)", dims=[32, 64, 128, 256],
                               values=[0.3, 0.5, 0.7, 0.85], verdict=Verdict.INCONCLUSIVE)

        with patch.object(POVMAnalyzer, "dimension_scaling", return_value=report):
            table = self.service.run(only=[6])

        assert table.rows[0].status == ClaimStatus.FAIL.value
        assert table.rows[0].note is None
        assert table.passed is False

    def test_obstruction_passes_phase_row(self):
        """Test that a nondecreasing sequence reaching 0.9 passes the phase row."""
        report = ScalingReport(probe="norm of circ:[0,0.1)", dims=[32, 64, 128, 256],
                               values=[0.6, 0.8, 0.9, 0.95], verdict=Verdict.OBSTRUCTION)

        with patch.object(POVMAnalyzer, "dimension_scaling", return_value=report):
            table = self.service.run(only=[6])

        assert table.rows[0].status == ClaimStatus.PASS.value
        assert table.passed is True

    def test_two_dimensions_cannot_stay_inconclusive(self):
        """Test that with two or more dimensions a missing obstruction is a failure."""
        service = ReproductionService(seed=12345, dims=[8, 9])
        report = ScalingReport(probe="norm", dims=[8, 9], values=[0.4, 0.45], verdict=Verdict.INCONCLUSIVE)

        with patch.object(POVMAnalyzer, "dimension_scaling", return_value=report):
            row = service.run(only=[6]).rows[0]

        assert row.status == ClaimStatus.FAIL.value

import math

import pytest

from povmlab.models.reports import ClaimStatus
from povmlab.services.reproduction_service import ReproductionService


@pytest.fixture(scope="module")
def claims_table():
    """Full claims table at the default parameters."""
    return ReproductionService(seed=12345, workers=2).run()


@pytest.mark.slow
class TestAcceptance:
    """Full-size runs of every claims-table row."""

    def test_all_rows_present(self, claims_table):
        """Test that every row is computed in order."""
        assert [row.row for row in claims_table.rows] == list(range(1, 13))

    @pytest.mark.parametrize("row", range(1, 13))
    def test_row_passes(self, claims_table, row):
        """Test that each claim holds at the default parameters."""
        result = claims_table.rows[row - 1]

        assert result.status == ClaimStatus.PASS.value, result.measured

    def test_lipschitz_bound(self, claims_table):
        """Test the Gaussian modulus against √2/(l√π)·0.1."""
        measured = claims_table.rows[0].measured

        for width, values in zip((0.5, 1.0, 2.0), measured.values()):
            assert values["bound"] == pytest.approx(math.sqrt(2.0 / math.pi) * 0.1 / width)
            assert values["modulus"] <= values["bound"] + 1e-9

    def test_compactness_residuals(self, claims_table):
        """Test the residual norms over D = 50, 100, 200, 400."""
        measured = claims_table.rows[3].measured

        assert measured["dims"] == [50, 100, 200, 400]
        assert measured["residual_norms"][-1] >= 0.9
        assert measured["verdict"] == "obstruction"

    def test_canonical_phase_norms(self, claims_table):
        """Test that ‖E_can([0,0.1))‖ approaches one."""
        measured = claims_table.rows[5].measured

        assert measured["norms"][-1] >= 0.9
        assert measured["singleton_norms"] == [0.0, 0.0, 0.0, 0.0]

    def test_e1_bound(self, claims_table):
        """Test ‖E_1(Δ)‖ ≤ 3/(2π)·|Δ| on random arcs."""
        measured = claims_table.rows[4].measured

        assert measured["bound"] == pytest.approx(3.0 / (2.0 * math.pi))
        assert measured["max_excess"] <= 1e-9
        assert measured["verdict"] == "decays"

    def test_sampler_equivalence(self, claims_table):
        """Test the exact marginal identity of the two samplers."""
        measured = claims_table.rows[10].measured

        assert measured["marginal_deviation"] <= 1e-12
        assert sum(measured["direct_counts"]) == measured["samples"]


@pytest.mark.slow
class TestParameterSweep:
    """Number-observable rows at another unsharpness."""

    def test_high_unsharpness(self):
        """Test that eps = 0.9 gives the same verdicts."""
        table = ReproductionService(seed=12345, eps=0.9).run(only=[3, 4])

        assert [row.status for row in table.rows] == ["pass", "pass"]

import json
import os
from unittest.mock import patch

import pytest

from povmlab.cli import EXIT_CHECK_FAILED, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, CLI
from povmlab.models.povm import POVMError
from povmlab.models.reports import AnalyzerReport
from povmlab.utils.file_utils import load_json


def _printed_json(mock_print):
    """JSON document passed to the last print call."""
    return json.loads(mock_print.call_args[0][0])


class TestCLI:
    """Unit tests for the CLI module."""

    def setup_method(self):
        """Set up test fixtures."""
        self.cli = CLI()

    def test_no_command(self):
        """Test that a missing command is a usage error."""
        assert self.cli.run([]) == EXIT_USAGE

    def test_help(self):
        """Test that --help exits cleanly."""
        assert self.cli.run(["--help"]) == EXIT_OK

    def test_unknown_option(self):
        """Test that argparse errors map to the usage exit code."""
        assert self.cli.run(["probe"]) == EXIT_USAGE

    def test_schema(self):
        """Test printing the report schema."""
        with patch("builtins.print") as mock_print:
            code = self.cli.run(["analyze", "--schema"])

        assert code == EXIT_OK
        assert "analyzer" in _printed_json(mock_print)["properties"]

    def test_probe(self, tmp_path):
        """Test probing one set and exporting its matrix."""
        matrix_file = os.path.join(str(tmp_path), "f0.txt")

        with patch("builtins.print") as mock_print:
            code = self.cli.run(["probe", "unsharp-number:eps=0.5,dim=10", "nat:{0}",
                                 "--matrix-out", matrix_file])

        result = _printed_json(mock_print)
        assert code == EXIT_OK
        assert result["norm"] == pytest.approx(1.0)
        assert result["class"] == "effect"
        assert result["matrix_file"] == matrix_file
        with open(matrix_file, encoding="utf-8") as f:
            assert f.readline().strip() == "10"

    def test_probe_unknown_observable(self):
        """Test that an unknown observable is a usage error."""
        assert self.cli.run(["probe", "spin:dim=2", "[0,1)"]) == EXIT_USAGE

    def test_probe_malformed_set(self):
        """Test that malformed set text is a usage error."""
        assert self.cli.run(["probe", "phase-can:dim=8", "circ:[0,"]) == EXIT_USAGE

    @patch("povmlab.cli.App.probe")
    def test_numerical_error(self, mock_probe):
        """Test that numerical failures map to exit code 3."""
        mock_probe.side_effect = POVMError("evaluation failed")

        assert self.cli.run(["probe", "phase-can:dim=8", "circ:[0,1)"]) == EXIT_NUMERICAL

    def test_kernel(self):
        """Test evaluating a Gaussian kernel."""
        with patch("builtins.print") as mock_print:
            code = self.cli.run(["kernel", "gaussian:l=1", "[0,1)", "--at", "0"])

        result = _printed_json(mock_print)
        assert code == EXIT_OK
        assert result["kernel"] == "gaussian(l=1.0)"
        assert result["values"][0]["value"] == pytest.approx(0.3413447460685429)
        assert result["axioms"]["passed"] is True

    def test_kernel_wrong_domain(self):
        """Test that a set of the wrong domain is a usage or numerical error."""
        assert self.cli.run(["kernel", "gaussian:l=1", "circ:[0,1)"]) in (EXIT_USAGE, EXIT_NUMERICAL)

    def test_analyze(self, tmp_path):
        """Test an analyzer run writing its report."""
        output_dir = os.path.join(str(tmp_path), "reports")

        code = self.cli.run(["analyze", "--observable", "unsharp-number:dim=10", "--analyzers", "commute",
                             "--output-dir", output_dir])

        assert code == EXIT_OK
        report = load_json(os.path.join(output_dir, "commute.json"))
        assert report["checks"] == {"smeared_commutative": True}
        assert not os.path.exists(os.path.join(output_dir, "failures.json"))

    def test_analyze_seed_from_environment(self, tmp_path):
        """Test that POVMLAB_SEED overrides the seed flag."""
        output_dir = os.path.join(str(tmp_path), "reports")

        with patch.dict(os.environ, {"POVMLAB_SEED": "77"}):
            code = self.cli.run(["analyze", "--observable", "unsharp-number:dim=10", "--analyzers", "commute",
                                 "--seed", "5", "--output-dir", output_dir])

        assert code == EXIT_OK
        assert load_json(os.path.join(output_dir, "commute.json"))["seed"] == 77

    def test_analyze_failed_check(self, tmp_path):
        """Test that a failed check gives exit code 1 and failures.json."""
        output_dir = os.path.join(str(tmp_path), "reports")
        report = AnalyzerReport(analyzer="norm1", checks={"effects_bounded": False})

        with patch("povmlab.cli.App.run", return_value=[report]), patch("builtins.print"):
            code = self.cli.run(["analyze", "--observable", "phase-can:dim=8", "--output-dir", output_dir])

        assert code == EXIT_CHECK_FAILED
        failures = load_json(os.path.join(output_dir, "failures.json"))
        assert failures == [{"analyzer": "norm1", "checks": ["effects_bounded"], "failures": []}]

    def test_analyze_bad_family(self):
        """Test that --family needs ANALYZER=SPEC."""
        code = self.cli.run(["analyze", "--observable", "phase-can:dim=8", "--family", "shrinking-arc"])

        assert code == EXIT_USAGE

    def test_analyze_invalid_config(self):
        """Test that an invalid analyzer family is a usage error."""
        code = self.cli.run(["analyze", "--observable", "phase-can:dim=8", "--analyzers", "uc-probe",
                             "--family", "uc-probe=sets:nat:{1}"])

        assert code == EXIT_USAGE

    def test_sample(self, tmp_path):
        """Test direct sampling writing a histogram."""
        output_dir = os.path.join(str(tmp_path), "reports")

        with patch("builtins.print"):
            code = self.cli.run(["sample", "unsharp-number:eps=0.5,dim=8", "--partition", "nat:cells=8",
                                 "--state", "basis:k=3", "--samples", "2000", "--mode", "direct",
                                 "--seed", "1", "--output-dir", output_dir])

        assert code in (EXIT_OK, EXIT_CHECK_FAILED)
        report = load_json(os.path.join(output_dir, "sample.json"))
        assert report["seed"] == 1
        assert sum(report["details"]["histograms"]["direct"]["counts"]) == 2000
        assert os.path.exists(os.path.join(output_dir, "sample_direct_histogram.csv"))

    def test_reproduce(self, tmp_path):
        """Test computing selected claims rows."""
        output_dir = os.path.join(str(tmp_path), "claims")

        with patch("builtins.print") as mock_print:
            code = self.cli.run(["reproduce-paper", "--rows", "2", "12", "--output-dir", output_dir])

        assert code == EXIT_OK
        lines = [call.args[0] for call in mock_print.call_args_list]
        assert lines[0].split()[:2] == ["2", "pass"]
        assert lines[1].split()[:2] == ["12", "pass"]
        table = load_json(os.path.join(output_dir, "claims.json"))
        assert [row["row"] for row in table["rows"]] == [2, 12]
        assert os.path.exists(os.path.join(output_dir, "claims.csv"))

    def test_reproduce_unknown_row(self, tmp_path):
        """Test that an unknown row is a numerical error."""
        code = self.cli.run(["reproduce-paper", "--rows", "13", "--output-dir", str(tmp_path)])

        assert code == EXIT_NUMERICAL

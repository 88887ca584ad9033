import logging
import os
from typing import Dict, List, Sequence

import pandas as pd

from ..models.reports import AnalyzerReport, ClaimsTable, OutcomeHistogram
from ..utils.file_utils import ensure_directory, save_json

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


class ReportGeneratorError(Exception):
    """Exception raised for errors during report generation."""
    pass


class ReportGenerator:
    """Writer of analyzer reports, histograms and the claims table."""

    def __init__(self, output_dir: str):
        """Initialize the report generator.

        Args:
            output_dir: Directory receiving every report file
        """
        self.output_dir = output_dir

    def _path(self, name: str) -> str:
        ensure_directory(self.output_dir)
        return os.path.join(self.output_dir, name)

    def write_report(self, report: AnalyzerReport) -> List[str]:
        """Write one analyzer report as JSON plus its CSV exports.

        Args:
            report: Report to write; it is re-validated before emission

        Returns:
            List[str]: Written file paths

        Raises:
            ReportGeneratorError: If the report is invalid or cannot be written
        """
        try:
            report = AnalyzerReport.model_validate(report.model_dump())
            paths = [self._path(f"{report.analyzer}.json")]
            save_json(paths[0], report.model_dump())
            if report.sequence:
                paths.append(self.write_sequence_csv(f"{report.analyzer}_sequence.csv", report.sequence))
            for label, data in report.details.get("histograms", {}).items():
                histogram = OutcomeHistogram.model_validate(data)
                paths.append(self.write_histogram_csv(f"{report.analyzer}_{label}_histogram.csv", histogram))
        except ReportGeneratorError:
            raise
        except Exception as e:
            raise ReportGeneratorError(f"Failed to write {report.analyzer} report: {str(e)}")
        logger.debug(f"Wrote {', '.join(paths)}")
        return paths

    def write_reports(self, reports: Sequence[AnalyzerReport]) -> List[str]:
        """Write every report, then a failures.json listing failed checks."""
        paths = []
        for report in reports:
            paths.extend(self.write_report(report))
        failures = self.failures(reports)
        if failures:
            path = self._path("failures.json")
            save_json(path, failures)
            paths.append(path)
        return paths

    @staticmethod
    def failures(reports: Sequence[AnalyzerReport]) -> List[Dict[str, object]]:
        """Machine-readable list of failed checks."""
        result = []
        for report in reports:
            failed = sorted(name for name, ok in report.checks.items() if not ok)
            if failed or report.failures:
                result.append({"analyzer": report.analyzer, "checks": failed, "failures": report.failures})
        return result

    def write_sequence_csv(self, name: str, values: Sequence[float]) -> str:
        """CSV with columns index, value."""
        path = self._path(name)
        frame = pd.DataFrame({"index": range(1, len(values) + 1), "value": list(values)})
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path

    def write_histogram_csv(self, name: str, histogram: OutcomeHistogram) -> str:
        """CSV with columns cell, lower, upper, count."""
        path = self._path(name)
        frame = pd.DataFrame({"cell": histogram.cells, "lower": histogram.lower,
                              "upper": histogram.upper, "count": histogram.counts})
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path

    def write_histogram(self, histogram: OutcomeHistogram, stem: str = "histogram") -> List[str]:
        """Histogram as JSON with metadata plus CSV."""
        try:
            json_path = self._path(f"{stem}.json")
            save_json(json_path, histogram.model_dump())
            return [json_path, self.write_histogram_csv(f"{stem}.csv", histogram)]
        except Exception as e:
            raise ReportGeneratorError(f"Failed to write histogram: {str(e)}")

    def write_claims_table(self, table: ClaimsTable) -> List[str]:
        """Claims table as JSON and as a flat CSV (row, claim, status, measured values)."""
        try:
            json_path = self._path("claims.json")
            save_json(json_path, table.model_dump())
            records = []
            for row in table.rows:
                record = {"row": row.row, "claim": row.claim, "status": row.status}
                record.update({key: value for key, value in row.measured.items()
                               if isinstance(value, (int, float, str, bool))})
                records.append(record)
            csv_path = self._path("claims.csv")
            pd.DataFrame.from_records(records).to_csv(csv_path, index=False, float_format=CSV_FLOAT_FORMAT)
        except Exception as e:
            raise ReportGeneratorError(f"Failed to write claims table: {str(e)}")
        return [json_path, csv_path]

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from .core.app import DEFAULT_PARTITIONS, App, AppError, kernel_sample
from .core.catalog import CatalogError
from .generators.report_generator import ReportGenerator, ReportGeneratorError
from .models.config import DEFAULT_SEED, SEED_ENV_VAR, AnalyzerName, RunConfig, SamplingMode
from .models.kernels import KernelError, kernel_axiom_report
from .models.operators import OperatorError
from .models.povm import POVMError
from .models.reports import AnalyzerReport
from .models.sets import SetError
from .parsers.set_parser import SetParseError, parse_set
from .parsers.spec_parser import SpecParseError, SpecParser
from .services.analyzer_service import AnalyzerError
from .services.reproduction_service import ReproductionError, ReproductionService
from .services.sampling_service import SamplingError
from .utils.file_utils import FileFormatError, dump_json, write_text_file
from .validators.config_validator import ConfigValidationError

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stdout)
    ]
)

logger = logging.getLogger("povmlab_cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

USAGE_ERRORS = (SpecParseError, SetParseError, ConfigValidationError, FileFormatError)
NUMERICAL_ERRORS = (OperatorError, KernelError, POVMError, CatalogError, AnalyzerError,
                    SamplingError, SetError, AppError, ReproductionError, ReportGeneratorError)


class CLI:
    """Command line interface of povmlab."""

    def __init__(self):
        self.parser = argparse.ArgumentParser(
            prog="povmlab",
            description="Build POVMs on truncated Hilbert spaces and test their structural properties."
        )
        self._setup_arguments()

    def _setup_arguments(self):
        """Set up command line arguments."""
        self.parser.add_argument("--verbose", "-v", action="store_true", help="Enable debug output")
        subparsers = self.parser.add_subparsers(dest="command", help="Command to execute")

        analyze_parser = subparsers.add_parser("analyze", help="Run analyzers on a catalog observable")
        analyze_parser.add_argument("--config", "-c", help="JSON or YAML run configuration")
        analyze_parser.add_argument("--observable", "-o", help="Observable spec, e.g. 'phase-can:dim=128'")
        analyze_parser.add_argument("--analyzers", "-a", nargs="+", choices=[a.value for a in AnalyzerName],
                                    help="Analyzers to run")
        analyze_parser.add_argument("--family", action="append", metavar="ANALYZER=SPEC",
                                    help="Family spec for one analyzer (repeatable)")
        analyze_parser.add_argument("--measure", help="Reference measure spec for abs-cont")
        analyze_parser.add_argument("--partition", help="Partition spec for sample and kernel-axioms")
        analyze_parser.add_argument("--state", help="State spec for sample")
        analyze_parser.add_argument("--kernel", help="Kernel spec for kernel-axioms")
        analyze_parser.add_argument("--dims", nargs="+", type=int, help="Dimensions for scaling")
        analyze_parser.add_argument("--samples", type=int, help="Number of sampled outcomes")
        analyze_parser.add_argument("--sampling-mode", choices=[m.value for m in SamplingMode],
                                    help="Sampling procedure")
        analyze_parser.add_argument("--singletons", nargs="+", type=float, help="Singleton probe points")
        analyze_parser.add_argument("--seed", type=int, help=f"Random seed ({SEED_ENV_VAR} overrides)")
        analyze_parser.add_argument("--workers", type=int, help="Worker threads")
        analyze_parser.add_argument("--output-dir", help="Report directory")
        analyze_parser.add_argument("--schema", action="store_true", help="Print the report JSON schema and exit")

        probe_parser = subparsers.add_parser("probe", help="Evaluate F(Δ) on one set")
        probe_parser.add_argument("observable", help="Observable spec")
        probe_parser.add_argument("set", help="Set text, e.g. 'circ:[0,0.1)'")
        probe_parser.add_argument("--matrix-out", help="Write the matrix of F(Δ) to this file")

        sample_parser = subparsers.add_parser("sample", help="Sample measurement outcomes")
        sample_parser.add_argument("observable", help="Observable spec")
        sample_parser.add_argument("--partition", help="Partition spec")
        sample_parser.add_argument("--state", default="uniform", help="State spec")
        sample_parser.add_argument("--samples", type=int, default=100000, help="Number of outcomes")
        sample_parser.add_argument("--mode", choices=[m.value for m in SamplingMode], default="both",
                                   help="Sampling procedure")
        sample_parser.add_argument("--seed", type=int, help="Random seed")
        sample_parser.add_argument("--workers", type=int, default=1, help="Worker threads")
        sample_parser.add_argument("--output-dir", default="reports", help="Report directory")

        kernel_parser = subparsers.add_parser("kernel", help="Evaluate a Markov kernel and check its axioms")
        kernel_parser.add_argument("kernel", help="Kernel spec, e.g. 'gaussian:l=1'")
        kernel_parser.add_argument("set", help="Outcome set")
        kernel_parser.add_argument("--at", nargs="+", type=float, help="Sharp values λ")
        kernel_parser.add_argument("--partition", help="Partition for the axiom check")

        reproduce_parser = subparsers.add_parser("reproduce-paper", help="Compute the claims table")
        reproduce_parser.add_argument("--eps", type=float, default=0.5, help="Unsharpness of the number rows")
        reproduce_parser.add_argument("--dims", nargs="+", type=int, help="Dimensions of the scaling rows")
        reproduce_parser.add_argument("--rows", nargs="+", type=int, help="Compute only these rows")
        reproduce_parser.add_argument("--seed", type=int, help="Random seed")
        reproduce_parser.add_argument("--workers", type=int, default=1, help="Worker threads")
        reproduce_parser.add_argument("--output-dir", "--output", default="reports", help="Report directory")

    def run(self, args: Optional[List[str]] = None) -> int:
        """Run the CLI with the provided arguments and return the exit code."""
        try:
            parsed_args = self.parser.parse_args(args)
        except SystemExit as e:
            return e.code if isinstance(e.code, int) else EXIT_USAGE

        if parsed_args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)

        if not parsed_args.command:
            self.parser.print_help()
            return EXIT_USAGE

        handlers = {
            "analyze": self._handle_analyze,
            "probe": self._handle_probe,
            "sample": self._handle_sample,
            "kernel": self._handle_kernel,
            "reproduce-paper": self._handle_reproduce,
        }
        try:
            return handlers[parsed_args.command](parsed_args)
        except USAGE_ERRORS as e:
            logger.error(f"Invalid input: {str(e)}")
            return EXIT_USAGE
        except NUMERICAL_ERRORS as e:
            logger.error(f"Computation failed: {str(e)}")
            return EXIT_NUMERICAL

    def _seed(self, seed: Optional[int]) -> int:
        """Seed flag, overridden by the environment variable."""
        value = os.environ.get(SEED_ENV_VAR)
        if value:
            try:
                return int(value)
            except ValueError:
                raise ConfigValidationError(f"{SEED_ENV_VAR} must be an integer", field="seed")
        return DEFAULT_SEED if seed is None else seed

    def _finish(self, generator: ReportGenerator, reports: List[AnalyzerReport]) -> int:
        paths = generator.write_reports(reports)
        for path in paths:
            logger.info(f"Wrote {path}")
        failures = generator.failures(reports)
        if failures:
            print(dump_json(failures))
            return EXIT_CHECK_FAILED
        return EXIT_OK

    def _handle_analyze(self, args) -> int:
        """Handle analyzer runs."""
        if args.schema:
            print(json.dumps(AnalyzerReport.model_json_schema(), indent=2, sort_keys=True))
            return EXIT_OK
        families: Optional[Dict[str, str]] = None
        if args.family:
            families = {}
            for item in args.family:
                name, sep, spec = item.partition("=")
                if not sep:
                    raise ConfigValidationError(f"expected ANALYZER=SPEC, got '{item}'", field="families")
                families[name.strip()] = spec.strip()
        overrides: Dict[str, Any] = {
            "observable": args.observable, "analyzers": args.analyzers, "families": families,
            "measure": args.measure, "partition": args.partition, "state": args.state,
            "kernel": args.kernel, "dims": args.dims, "samples": args.samples,
            "sampling_mode": args.sampling_mode, "singletons": args.singletons, "seed": args.seed,
            "workers": args.workers, "output_dir": args.output_dir,
        }
        config = App.build_config(args.config, overrides)
        app = App(config)
        reports = app.run()
        return self._finish(ReportGenerator(config.output_dir), reports)

    def _handle_probe(self, args) -> int:
        """Handle single-set probes."""
        app = App(RunConfig(observable=args.observable))
        result = app.probe(args.set)
        matrix_text = result.pop("matrix_text")
        if args.matrix_out:
            write_text_file(args.matrix_out, matrix_text)
            result["matrix_file"] = args.matrix_out
        print(dump_json(result))
        return EXIT_OK

    def _handle_sample(self, args) -> int:
        """Handle outcome sampling."""
        config = App.build_config(overrides={
            "observable": args.observable, "analyzers": [AnalyzerName.SAMPLE.value],
            "partition": args.partition, "state": args.state, "samples": args.samples,
            "sampling_mode": args.mode, "seed": args.seed, "workers": args.workers,
            "output_dir": args.output_dir,
        })
        app = App(config)
        report = app.run_analyzer(AnalyzerName.SAMPLE)
        return self._finish(ReportGenerator(config.output_dir), [report])

    def _handle_kernel(self, args) -> int:
        """Handle kernel evaluation."""
        spec_parser = SpecParser()
        kernel = spec_parser.parse_kernel(args.kernel)
        delta = parse_set(args.set, kernel.outcome_kind)
        points = np.asarray(args.at, dtype=float) if args.at else kernel_sample(kernel, 13)
        values = kernel.evaluate_many(points, delta)
        partition = spec_parser.parse_partition(
            args.partition or DEFAULT_PARTITIONS[kernel.outcome_kind], kernel.outcome_kind)
        axioms = kernel_axiom_report(kernel, points, partition)
        print(dump_json({
            "kernel": kernel.label,
            "set": delta.to_text(),
            "values": [{"lambda": float(lam), "value": float(v)} for lam, v in zip(points, values)],
            "axioms": axioms.model_dump(),
        }))
        return EXIT_OK if axioms.passed else EXIT_CHECK_FAILED

    def _handle_reproduce(self, args) -> int:
        """Handle the claims-table run."""
        seed = self._seed(args.seed)
        service = ReproductionService(seed=seed, eps=args.eps, dims=args.dims, workers=args.workers)
        table = service.run(args.rows)
        generator = ReportGenerator(args.output_dir)
        for path in generator.write_claims_table(table):
            logger.info(f"Wrote {path}")
        for row in table.rows:
            print(f"{row.row:>2}  {row.status:<12} {row.claim}")
        if not table.passed:
            failed = [{"row": row.row, "claim": row.claim} for row in table.rows if row.status == "fail"]
            print(dump_json(failed))
            return EXIT_CHECK_FAILED
        return EXIT_OK


def main():
    """Main entry point for the CLI."""
    cli = CLI()
    sys.exit(cli.run())


if __name__ == "__main__":
    main()

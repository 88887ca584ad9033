from typing import List, Optional, Tuple
import math

from ..core.catalog import ObservableSpec, parse_observable
from ..models.config import AnalyzerName, RunConfig, SamplingMode
from ..models.sets import SetKind
from ..parsers.spec_parser import SpecParseError, SpecParser

SMEARED_OBSERVABLES = ("unsharp-number", "bounded-pos", "gauss-pos")


class ConfigValidationError(Exception):
    """Exception raised for run configurations that cannot be executed."""
    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        self.message = message
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the error message with field information."""
        if self.field is not None:
            return f"Field '{self.field}': {self.message}"
        return self.message


class ConfigValidator:
    """Validator for run configurations, applied before any computation."""

    def __init__(self):
        """Initialize the config validator."""
        self.spec_parser = SpecParser()

    def validate_config(self, config: RunConfig) -> Tuple[bool, List[ConfigValidationError]]:
        """Validate a run configuration.

        Args:
            config: RunConfig to validate

        Returns:
            Tuple[bool, List[ConfigValidationError]]: Validation result and list of errors
        """
        errors = []
        try:
            observable = parse_observable(config.observable)
        except SpecParseError as e:
            errors.append(ConfigValidationError(str(e), field="observable"))
            return False, errors
        kind = observable.kind

        self._validate_families(config, kind, errors)
        self._validate_specs(config, kind, errors)
        self._validate_analyzers(config, observable, errors)

        return len(errors) == 0, errors

    def _validate_families(self, config: RunConfig, kind: SetKind,
                           errors: List[ConfigValidationError]) -> None:
        known = {a.value for a in AnalyzerName}
        for name, text in config.families.items():
            if name not in known:
                errors.append(ConfigValidationError(f"unknown analyzer '{name}'", field="families"))
                continue
            try:
                family = self.spec_parser.parse_family(text, kind, seed=config.seed)
            except SpecParseError as e:
                errors.append(ConfigValidationError(str(e), field="families"))
                continue
            wrong = [m for m in family.members if m.kind != kind]
            if wrong:
                errors.append(ConfigValidationError(
                    f"family '{text}' holds {wrong[0].kind.value} sets, observable needs {kind.value} sets",
                    field="families"))

    def _validate_specs(self, config: RunConfig, kind: SetKind,
                        errors: List[ConfigValidationError]) -> None:
        if config.measure:
            try:
                nu = self.spec_parser.parse_measure(config.measure, kind)
                if nu.domain is not None and nu.domain != kind:
                    errors.append(ConfigValidationError(
                        f"measure acts on {nu.domain.value} sets, observable needs {kind.value}",
                        field="measure"))
            except SpecParseError as e:
                errors.append(ConfigValidationError(str(e), field="measure"))
        if config.partition:
            try:
                cells = self.spec_parser.parse_partition(config.partition, kind)
                if any(cell.kind != kind for cell in cells):
                    errors.append(ConfigValidationError(
                        f"partition cells must be {kind.value} sets", field="partition"))
            except SpecParseError as e:
                errors.append(ConfigValidationError(str(e), field="partition"))
        try:
            self.spec_parser.parse_state(config.state)
        except SpecParseError as e:
            errors.append(ConfigValidationError(str(e), field="state"))
        if config.kernel:
            try:
                self.spec_parser.parse_kernel(config.kernel)
            except SpecParseError as e:
                errors.append(ConfigValidationError(str(e), field="kernel"))
        for x in config.singletons:
            if not math.isfinite(x):
                errors.append(ConfigValidationError(f"singleton probe {x!r} is not finite", field="singletons"))
            elif kind == SetKind.NATURALS and (x < 0 or x != int(x)):
                errors.append(ConfigValidationError(f"singleton probe {x!r} is not a natural", field="singletons"))

    def _validate_analyzers(self, config: RunConfig, observable: ObservableSpec,
                            errors: List[ConfigValidationError]) -> None:
        analyzers = [AnalyzerName(a) for a in config.analyzers]
        if not analyzers:
            errors.append(ConfigValidationError("at least one analyzer is required", field="analyzers"))
        if len(set(analyzers)) != len(analyzers):
            errors.append(ConfigValidationError("analyzers must not repeat", field="analyzers"))
        for analyzer in analyzers:
            if analyzer == AnalyzerName.COVARIANCE and observable.kind != SetKind.CIRCLE:
                errors.append(ConfigValidationError(
                    f"covariance needs a phase observable, got {observable.name}", field="analyzers"))
            if analyzer == AnalyzerName.SCALING and not config.dims:
                errors.append(ConfigValidationError(
                    "scaling needs at least one dimension", field="dims"))
            if analyzer == AnalyzerName.SAMPLE and config.sampling_mode == SamplingMode.TWO_STAGE \
                    and observable.name not in SMEARED_OBSERVABLES:
                errors.append(ConfigValidationError(
                    f"two-stage sampling needs a smeared observable, got {observable.name}",
                    field="sampling_mode"))
            if analyzer == AnalyzerName.KERNEL_AXIOMS and not config.kernel \
                    and observable.name not in SMEARED_OBSERVABLES:
                errors.append(ConfigValidationError(
                    f"{observable.name} has no kernel; set 'kernel'", field="kernel"))

    def require_valid(self, config: RunConfig) -> None:
        """Raise the first validation error, if any.

        Raises:
            ConfigValidationError: If the configuration is invalid
        """
        valid, errors = self.validate_config(config)
        if not valid:
            raise errors[0]

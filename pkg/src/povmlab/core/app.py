"""
Application orchestrator: builds the configured observable and runs analyzers into
AnalyzerReports.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from ..models.config import SEED_ENV_VAR, AnalyzerName, RunConfig, SamplingMode
from ..models.kernels import (
    GaussianKernel, KernelDomain, MarkovKernel, continuity_modulus, kernel_axiom_report,
)
from ..models.operators import HermitianOperator, State, classify, matrix_to_text
from ..models.povm import POVM
from ..models.reports import AnalyzerReport, ProbeMode, Verdict
from ..models.sets import (
    CircleSet, LineSet, MeasurableSet, NatSet, SetKind, difference,
)
from ..parsers.set_parser import parse_set
from ..parsers.spec_parser import FamilySpec, SpecParser, StateSpec
from ..services.analyzer_service import POVMAnalyzer
from ..services.sampling_service import OutcomeSampler
from ..utils.file_utils import load_yaml
from ..utils.numeric_utils import TWO_PI, make_rng
from ..validators.config_validator import ConfigValidationError, ConfigValidator
from .catalog import ObservableSpec, covariance_check, parse_observable

logger = logging.getLogger(__name__)

EFFECT_TOL = 1e-9
COMMUTE_TOL = 1e-10
COVARIANCE_TOL = 1e-10
MARGINAL_TOL = 1e-12
LIPSCHITZ_STEP = 0.1
COVARIANCE_ANGLES = 10

DEFAULT_FAMILIES: Dict[str, Dict[SetKind, str]] = {
    "norm1": {
        SetKind.LINE: "random-intervals:count=50",
        SetKind.CIRCLE: "random-arcs:count=50",
        SetKind.NATURALS: "sets:" + ";".join(f"nat:{{{n}}}" for n in range(21)),
    },
    "abs-cont": {
        SetKind.LINE: "random-intervals:count=200",
        SetKind.CIRCLE: "random-arcs:count=200",
        SetKind.NATURALS: "random-nat:count=200",
    },
    "commute": {
        SetKind.LINE: "random-intervals:count=20",
        SetKind.CIRCLE: "random-arcs:count=20",
        SetKind.NATURALS: "random-nat:count=20",
    },
    "covariance": {
        SetKind.CIRCLE: "random-arcs:count=50",
    },
    "kernel-axioms": {
        SetKind.LINE: "random-intervals:count=100,low=-3,high=3",
        SetKind.CIRCLE: "random-arcs:count=100",
        SetKind.NATURALS: "random-nat:count=100",
    },
}
DEFAULT_PROBE_FAMILIES = {
    "unsharp-number": "nat-tail:count=20",
    "phase-e1": "shrinking-arc:count=20",
    "phase-can": "shrinking-arc:count=20",
    "bounded-pos": "nested-interval:count=50",
    "gauss-pos": "escaping-halfline:count=20",
}
SCALING_PROBES = {
    "unsharp-number": "nat:co{0..5}",
    "phase-e1": "circ:[0,0.1)",
    "phase-can": "circ:[0,0.1)",
    "bounded-pos": "(0,0.01)",
    "gauss-pos": "(-inf,-20)",
}
DEFAULT_MEASURES = {
    "unsharp-number": "counting",
    "phase-e1": "lebesgue-circle",
    "phase-can": "lebesgue-circle",
    "bounded-pos": "weighted:M=1.5,window=-1:1",
    "gauss-pos": "lebesgue-line",
}
# Known constants c with ‖F(Δ)‖ ≤ c·ν(Δ) under the default measure.
ABS_CONT_BOUNDS = {
    "phase-e1": 3.0 / TWO_PI,
    "bounded-pos": 1.0,
}
DEFAULT_PARTITIONS = {
    SetKind.LINE: "grid:lower=-3,upper=3,cells=8",
    SetKind.CIRCLE: "arcs:cells=8",
    SetKind.NATURALS: "nat:cells=10",
}
DEFAULT_SINGLETONS = {
    SetKind.LINE: [0.25, 0.5],
    SetKind.CIRCLE: [0.0, math.pi / 2],
    SetKind.NATURALS: [0.0, 1.0, 2.0],
}


class AppError(Exception):
    """Exception raised when a configured run cannot be executed."""
    pass


def singleton(kind: SetKind, x: float) -> MeasurableSet:
    if kind == SetKind.NATURALS:
        return NatSet.singleton(int(x))
    if kind == SetKind.CIRCLE:
        return CircleSet.singleton(x)
    return LineSet.singleton(x)


def kernel_sample(kernel: MarkovKernel, count: int = 61) -> np.ndarray:
    """Sharp values spread over a kernel's domain."""
    if kernel.domain == KernelDomain.UNIT_INTERVAL:
        return np.linspace(0.0, 1.0, count)
    if kernel.domain == KernelDomain.NATURALS:
        return np.arange(count, dtype=float)
    if kernel.domain == KernelDomain.CIRCLE:
        return np.linspace(0.0, TWO_PI, count, endpoint=False)
    return np.linspace(-3.0, 3.0, count)


class App:
    """Runs the analyzers of one RunConfig."""

    def __init__(self, config: RunConfig):
        """
        Initialize the application.

        Args:
            config: Validated or unvalidated run configuration

        Raises:
            ConfigValidationError: If the configuration is invalid
        """
        ConfigValidator().require_valid(config)
        self.config = config
        self.spec_parser = SpecParser()
        self.observable: ObservableSpec = parse_observable(config.observable)
        self.kind = self.observable.kind
        self.analyzer = POVMAnalyzer(workers=config.workers, seed=config.seed)
        self.sampler = OutcomeSampler(workers=config.workers)
        self._povm: Optional[POVM] = None

    @staticmethod
    def build_config(config_file: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None,
                     environ: Optional[Mapping[str, str]] = None) -> RunConfig:
        """
        Merge model defaults, a JSON/YAML config file, flag overrides and POVMLAB_SEED.

        Raises:
            ConfigValidationError: If the merged values do not form a RunConfig
        """
        data: Dict[str, Any] = {}
        if config_file:
            try:
                loaded = load_yaml(config_file)
            except Exception as e:
                raise ConfigValidationError(f"cannot read config file {config_file}: {str(e)}")
            if loaded is not None and not isinstance(loaded, dict):
                raise ConfigValidationError("config file must hold a mapping")
            data.update(loaded or {})
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        environ = os.environ if environ is None else environ
        if environ.get(SEED_ENV_VAR):
            try:
                data["seed"] = int(environ[SEED_ENV_VAR])
            except ValueError:
                raise ConfigValidationError(f"{SEED_ENV_VAR} must be an integer", field="seed")
        try:
            return RunConfig(**data)
        except ValueError as e:
            raise ConfigValidationError(str(e))

    @property
    def povm(self) -> POVM:
        if self._povm is None:
            self._povm = self.observable.build()
        return self._povm

    def family(self, analyzer: str, default: Optional[str] = None) -> FamilySpec:
        text = self.config.families.get(analyzer)
        if text is None:
            text = default if default is not None else DEFAULT_FAMILIES[analyzer][self.kind]
        return self.spec_parser.parse_family(text, self.kind, seed=self.config.seed)

    def partition(self) -> List[MeasurableSet]:
        return self.spec_parser.parse_partition(self.config.partition or DEFAULT_PARTITIONS[self.kind], self.kind)

    def state(self, povm: POVM) -> State:
        return self.resolve_state(self.spec_parser.parse_state(self.config.state), povm, self.config.seed)

    @staticmethod
    def resolve_state(spec: StateSpec, povm: POVM, seed: Optional[int] = None) -> State:
        """Turn a parsed state spec into a unit vector of the POVM's dimension.

        Raises:
            AppError: If a position state is requested for an observable without a spectral grid
        """
        if spec.kind == "uniform":
            return State.uniform(povm.dim)
        if spec.kind == "basis":
            return State.basis(povm.dim, spec.index)
        if spec.kind == "random":
            return State.random(povm.dim, make_rng(spec.seed if spec.seed is not None else seed))
        measure = povm.spectral_measure
        if measure is None or measure.basis is not None:
            raise AppError(f"position states need a diagonal spectral grid, {povm.description} has none")
        column = int(np.argmin(np.abs(measure.points[measure.labels] - spec.x)))
        return State.basis(povm.dim, column)

    def run(self) -> List[AnalyzerReport]:
        """Run every configured analyzer; reports keep the configured order."""
        names = [AnalyzerName(a) for a in self.config.analyzers]
        logger.info(f"Running {', '.join(n.value for n in names)} on {self.observable.text()}")
        _ = self.povm
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(self.run_analyzer, names))

    def run_analyzer(self, name: AnalyzerName) -> AnalyzerReport:
        handlers = {
            AnalyzerName.NORM1: self._norm1,
            AnalyzerName.UC_PROBE: self._uc_probe,
            AnalyzerName.ABS_CONT: self._abs_cont,
            AnalyzerName.COMMUTE: self._commute,
            AnalyzerName.COVARIANCE: self._covariance,
            AnalyzerName.SCALING: self._scaling,
            AnalyzerName.SAMPLE: self._sample,
            AnalyzerName.KERNEL_AXIOMS: self._kernel_axioms,
        }
        logger.debug(f"Analyzer {name.value} started")
        report = handlers[AnalyzerName(name)]()
        logger.info(f"Analyzer {name.value} finished: verdict={report.verdict}, "
                    f"failures={len(report.failures)}")
        return report

    def _report(self, analyzer: str, **fields) -> AnalyzerReport:
        inputs = {"observable": self.observable.text(), **fields.pop("inputs", {})}
        return AnalyzerReport(analyzer=analyzer, inputs=inputs, seed=self.config.seed, **fields)

    def _norm1(self) -> AnalyzerReport:
        family = self.family("norm1")
        points = self.config.singletons or DEFAULT_SINGLETONS[self.kind]
        singletons = [singleton(self.kind, x) for x in points]
        result = self.analyzer.norm1_scan(self.povm, family.members, singletons)
        values = [self.povm.norm(delta) for delta in family.members]
        bounded = all(v <= 1.0 + EFFECT_TOL for v in values)
        details = result.model_dump()
        if result.norms:
            top = max(result.norms, key=lambda item: item.value)
            value, _ = self.analyzer.norm1_witness(self.povm, parse_set(top.set, self.kind))
            details["witness"] = {"set": top.set, "expectation": value}
        return self._report(
            "norm1", inputs={"family": family.description, "singletons": points},
            sequence=values, verdict=Verdict.NORM1 if result.norm1_on_family else Verdict.NOT_NORM1,
            tolerances={"zero": 1e-9, "norm1": 1e-6},
            checks={"effects_bounded": bounded},
            failures=[] if bounded else ["effect norm exceeds 1"], details=details)

    def _uc_probe(self) -> AnalyzerReport:
        family = self.family("uc-probe", DEFAULT_PROBE_FAMILIES[self.observable.name])
        report = self.analyzer.uniform_continuity_probe(self.povm, family.members, family.description,
                                                        family.mode, family.limit)
        if self.config.dims:
            tail = family.members[-1]
            if family.mode == ProbeMode.FROM_BELOW:
                # F(Δ) − F(Δ_n) = F(Δ ∖ Δ_n)
                tail = difference(family.limit, tail)
            report.scaling = self.analyzer.dimension_scaling(
                self._builder(), self.config.dims, lambda povm: povm.norm(tail), f"norm of {tail.to_text()}")
        bounded = all(v <= 1.0 + EFFECT_TOL for v in report.norms)
        return self._report(
            "uc-probe", inputs={"family": family.description, "mode": family.mode.value},
            sequence=report.norms, verdict=report.verdict,
            tolerances={"decay_factor": 0.01, "decay_rate": 0.5, "persist_level": 0.9},
            checks={"norms_bounded": bounded},
            failures=[] if bounded else ["probe norm exceeds 1"],
            details=report.model_dump())

    def _abs_cont(self) -> AnalyzerReport:
        family = self.family("abs-cont")
        measure_text = self.config.measure or DEFAULT_MEASURES[self.observable.name]
        nu = self.spec_parser.parse_measure(measure_text, self.kind)
        fit = self.analyzer.absolute_continuity_fit(self.povm, nu, family.members)
        checks = {"null_sets_vanish": not fit.failures}
        failures = [f"F(Δ) ≠ 0 on ν-null set {text}" for text in fit.failures]
        bound = ABS_CONT_BOUNDS.get(self.observable.name)
        if bound is not None and self.config.measure is None and fit.c_hat is not None:
            checks["within_known_bound"] = fit.c_hat <= bound + EFFECT_TOL
            if not checks["within_known_bound"]:
                failures.append(f"c_hat {fit.c_hat!r} exceeds {bound!r}")
        verdict = Verdict.PASS if fit.c_hat is not None and not fit.failures else Verdict.FAIL
        return self._report(
            "abs-cont", inputs={"family": family.description, "measure": nu.describe()},
            sequence=[item.value for item in fit.ratios], verdict=verdict,
            tolerances={"zero": 1e-9}, checks=checks, failures=failures,
            details=fit.model_dump())

    def _commute(self) -> AnalyzerReport:
        family = self.family("commute")
        result = self.analyzer.check_commutative(self.povm, family.members, self.config.pairs_budget)
        pvm = self.analyzer.is_pvm(self.povm, family.members)
        cells = self.partition()
        pairs = [(cells[j], cells[j + 1]) for j in range(len(cells) - 1)]
        orthogonal = self.analyzer.check_orthogonal(self.povm, pairs)
        commutative = result.max_norm <= COMMUTE_TOL
        checks = {}
        failures = []
        if self.povm.is_smeared:
            checks["smeared_commutative"] = commutative
            if not commutative:
                failures.append(f"smeared observable has commutator norm {result.max_norm!r}")
        return self._report(
            "commute", inputs={"family": family.description, "pairs_budget": self.config.pairs_budget},
            sequence=[result.max_norm], verdict=Verdict.PASS if commutative else Verdict.FAIL,
            tolerances={"commute": COMMUTE_TOL, "pvm": 1e-8}, checks=checks, failures=failures,
            details={"commutator": result.model_dump(), "pvm": pvm.model_dump(),
                     "orthogonality": orthogonal.model_dump()})

    def _covariance(self) -> AnalyzerReport:
        family = self.family("covariance")
        thetas = make_rng(self.config.seed).uniform(0.0, TWO_PI, size=COVARIANCE_ANGLES).tolist()
        result = covariance_check(self.povm, thetas, family.members)
        ok = result.max_deviation <= COVARIANCE_TOL
        return self._report(
            "covariance", inputs={"family": family.description, "thetas": thetas},
            sequence=[result.max_deviation], verdict=Verdict.PASS if ok else Verdict.FAIL,
            tolerances={"covariance": COVARIANCE_TOL}, checks={"covariant": ok},
            failures=[] if ok else [f"covariance deviation {result.max_deviation!r}"],
            details=result.model_dump())

    def _builder(self):
        spec = self.observable
        return lambda size: spec.with_size(size).build()

    def scaling_probe_set(self) -> MeasurableSet:
        text = self.config.families.get("scaling")
        if text is not None:
            return self.family("scaling").members[0]
        return parse_set(SCALING_PROBES[self.observable.name], self.kind)

    def _scaling(self) -> AnalyzerReport:
        probe_set = self.scaling_probe_set()
        report = self.analyzer.dimension_scaling(self._builder(), self.config.dims,
                                                 lambda povm: povm.norm(probe_set),
                                                 f"norm of {probe_set.to_text()}")
        return self._report(
            "scaling", inputs={"probe": report.probe, "size_parameter": self.observable.size_key},
            sequence=report.values, verdict=report.verdict,
            tolerances={"obstruction_level": 0.9, "uc_growth": 1.1},
            details=report.model_dump())

    def _sample(self) -> AnalyzerReport:
        povm = self.povm
        cells = self.partition()
        state = self.state(povm)
        mode = SamplingMode(self.config.sampling_mode)
        total, seed = self.config.samples, self.config.seed
        probs = self.sampler.born_probabilities(povm, state, cells)
        checks: Dict[str, bool] = {}
        failures: List[str] = []
        histograms = {}
        summaries: Dict[str, Any] = {"probabilities": probs.tolist()}

        if mode in (SamplingMode.DIRECT, SamplingMode.BOTH):
            histograms["direct"] = self.sampler.sample_direct(povm, state, cells, total, seed)
        if mode in (SamplingMode.TWO_STAGE, SamplingMode.BOTH) and povm.is_smeared:
            law = self.sampler.two_stage_law(povm.spectral_measure, povm.kernel, state, cells)
            marginal = float(np.max(np.abs(law - probs)))
            summaries["marginal_deviation"] = marginal
            checks["marginal_identity"] = marginal <= MARGINAL_TOL
            if not checks["marginal_identity"]:
                failures.append(f"two-stage marginal deviates by {marginal!r}")
            histograms["two-stage"] = self.sampler.sample_two_stage(
                povm.spectral_measure, povm.kernel, state, cells, total, seed + 1)

        for label, histogram in histograms.items():
            chi = self.sampler.chi_square_against(histogram, probs)
            sigma = self.sampler.four_sigma_check(histogram, probs)
            summaries[label] = {"chi_square": chi.model_dump(),
                                "four_sigma": sigma.model_dump(),
                                "total_variation": self.sampler.total_variation(histogram, probs)}
            checks[f"{label}_chi_square"] = chi.passed
            if not chi.passed:
                failures.append(f"{label} histogram fails chi-square ({chi.statistic!r} ≥ {chi.quantile!r})")
        if len(histograms) == 2:
            comparison = self.sampler.compare_histograms(histograms["direct"], histograms["two-stage"])
            summaries["comparison"] = comparison.model_dump()
            checks["direct_matches_two_stage"] = comparison.passed
            if not comparison.passed:
                failures.append("direct and two-stage histograms differ")
        summaries["histograms"] = {label: h.model_dump() for label, h in histograms.items()}
        return self._report(
            "sample", inputs={"partition": [c.to_text() for c in cells], "state": self.config.state,
                              "samples": total, "mode": mode.value},
            sequence=probs.tolist(), verdict=Verdict.PASS if not failures else Verdict.FAIL,
            tolerances={"probability_sum": 1e-9, "marginal": MARGINAL_TOL, "chi_square_level": 0.999},
            checks=checks, failures=failures, details=summaries)

    def kernel(self) -> MarkovKernel:
        if self.config.kernel:
            return self.spec_parser.parse_kernel(self.config.kernel)
        if self.povm.kernel is None:
            raise AppError(f"{self.povm.description} carries no kernel")
        return self.povm.kernel

    def _kernel_axioms(self) -> AnalyzerReport:
        kernel = self.kernel()
        partition = self.spec_parser.parse_partition(
            self.config.partition or DEFAULT_PARTITIONS[kernel.outcome_kind], kernel.outcome_kind)
        povm = self.povm
        if povm.kernel is kernel:
            sample = povm.spectral_measure.points
        else:
            sample = kernel_sample(kernel)
        axioms = kernel_axiom_report(kernel, sample, partition)
        checks = {"axioms": axioms.passed}
        failures = [] if axioms.passed else ["kernel violates the probability-measure axioms"]
        details: Dict[str, Any] = {"axioms": axioms.model_dump()}
        sequence: List[float] = []
        if kernel.domain != KernelDomain.NATURALS:
            family = self.spec_parser.parse_family(
                self.config.families.get("kernel-axioms", DEFAULT_FAMILIES["kernel-axioms"][kernel.outcome_kind]),
                kernel.outcome_kind, seed=self.config.seed)
            grid = kernel_sample(kernel, 161)
            moduli = [continuity_modulus(kernel, delta, grid, LIPSCHITZ_STEP) for delta in family.members]
            sequence = [m.value for m in moduli]
            details["modulus"] = {"step": LIPSCHITZ_STEP, "max": max(sequence),
                                  "max_ratio": max(m.max_ratio for m in moduli)}
            if isinstance(kernel, GaussianKernel):
                bound = kernel.lipschitz_bound(LIPSCHITZ_STEP)
                details["modulus"]["lipschitz_bound"] = bound
                checks["lipschitz"] = max(sequence) <= bound + EFFECT_TOL
                if not checks["lipschitz"]:
                    failures.append(f"modulus {max(sequence)!r} exceeds {bound!r}")
        return self._report(
            "kernel-axioms", inputs={"kernel": kernel.label,
                                     "partition": [c.to_text() for c in partition]},
            sequence=sequence, verdict=Verdict.PASS if not failures else Verdict.FAIL,
            tolerances={"axioms": 1e-9}, checks=checks, failures=failures, details=details)

    def probe(self, set_text: str) -> Dict[str, Any]:
        """Evaluate F(Δ) on one set: norm, classification and the matrix text."""
        delta = parse_set(set_text, self.kind)
        op = HermitianOperator.symmetrized(self.povm.matrix(delta))
        kind, witness = classify(op)
        return {"observable": self.observable.text(), "set": delta.to_text(),
                "norm": self.povm.norm(delta), "class": kind.value, "witness": witness,
                "trace": float(np.real(np.trace(op.matrix))), "matrix_text": matrix_to_text(op)}

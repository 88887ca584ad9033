"""
Claims table: reruns the worked examples (unsharp number, phase observables,
bounded and Gaussian unsharp position, smearing and sampling identities) and maps
each structural claim to pass, fail or inconclusive with its measured values.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from ..core.catalog import (
    CatalogError, bounded_unsharp_position, canonical_phase, covariance_check,
    e1_phase, gaussian_unsharp_position, halfline_localization, unsharp_number,
)
from ..models.kernels import BinomialKernel, GaussianKernel, KernelError, continuity_modulus, point_kernel
from ..models.operators import HermitianOperator, OperatorError, State, operator_norm
from ..models.povm import POVMError, SpectralMeasure, smear
from ..models.reports import ClaimRow, ClaimStatus, ClaimsTable, ScalingReport, Verdict
from ..models.sets import (
    CircleSet, LineSet, NatSet, ReferenceMeasure, SetError, SetKind, random_family, shrinking_family,
)
from ..parsers.spec_parser import SpecParser
from ..utils.numeric_utils import TWO_PI, binomial_tail, is_nondecreasing, make_rng
from .analyzer_service import AnalyzerError, POVMAnalyzer
from .sampling_service import OutcomeSampler, SamplingError

logger = logging.getLogger(__name__)

COMPACTNESS_DIMS = (50, 100, 200, 400)
PHASE_DIMS = (32, 64, 128, 256)
LIPSCHITZ_WIDTHS = (0.5, 1.0, 2.0)
LIPSCHITZ_STEP = 0.1
BINOMIAL_EPS = (0.1, 0.5, 0.9)
BINOMIAL_TRIALS = 200
NUMBER_DIM = 500
NUMBER_LEVELS = 20
RESIDUAL_CUT = 5
PHASE_PROBE = "circ:[0,0.1)"
SAMPLE_SIZE = 100000
BOUND_TOL = 1e-9
EXACT_TOL = 1e-12
COVARIANCE_TOL = 1e-10
COMMUTE_TOL = 1e-10
NONCOMMUTE_LEVEL = 1e-3
HALFLINE_LEVEL = 1.0 - 1e-6
PERSIST_NORM = 0.999
OBSTRUCTION_NORM = 0.9

CLAIMS = {
    1: "Gaussian kernel is Lipschitz with constant √2/(l√π)",
    2: "Binomial kernel is normalized: Σ_n μ_n(m) = 1",
    3: "Unsharp number: only F({0}) has eigenvalue 1",
    4: "Unsharp number: residual 1 − Σ_{i≤5} F_i does not vanish (1 is not compact)",
    5: "Phase E_1 is absolutely continuous with c = 3/(2π), hence uniformly continuous",
    6: "Canonical phase has the norm-1 property and is not uniformly continuous",
    7: "Phase observables are covariant: e^{iNθ}E(Δ)e^{−iNθ} = E(Δ⊕θ)",
    8: "Gaussian position: half-lines keep norm 1 and singletons vanish",
    9: "Bounded unsharp position is absolutely continuous and uniformly continuous",
    10: "Smearing a PVM with the point kernel gives the PVM; smeared POVMs are commutative",
    11: "Two-stage sampling reproduces the direct Born statistics",
    12: "Phase E_1 is not commutative",
}


class ReproductionError(Exception):
    """Exception raised when a claims-table row cannot be computed."""
    pass


def _shows_obstruction(report: ScalingReport) -> bool:
    """Norm-1 sequence that never decreases and ends at or above the obstruction level."""
    return Verdict(report.verdict) == Verdict.OBSTRUCTION and report.values[-1] >= OBSTRUCTION_NORM


def _status(passed: bool, inconclusive: bool = False) -> ClaimStatus:
    if not passed:
        return ClaimStatus.FAIL
    return ClaimStatus.INCONCLUSIVE if inconclusive else ClaimStatus.PASS


class ReproductionService:
    """Service computing the claims table of the worked examples."""

    def __init__(self, seed: int = 12345, eps: float = 0.5, dims: Optional[Sequence[int]] = None,
                 workers: int = 1):
        """Initialize the reproduction service.

        Args:
            seed: Seed of every random family and sample
            eps: Unsharpness of the number observable rows
            dims: Dimensions of both scaling rows (defaults differ per row)
            workers: Threads running rows and dimension sweeps
        """
        self.seed = seed
        self.eps = eps
        self.dims = [int(d) for d in dims] if dims else None
        self.workers = max(1, workers)
        self.analyzer = POVMAnalyzer(workers=self.workers, seed=seed)
        self.sampler = OutcomeSampler(workers=self.workers)
        self.spec_parser = SpecParser()

    def rows(self) -> Dict[int, Callable[[], ClaimRow]]:
        return {
            1: self.gaussian_lipschitz,
            2: self.binomial_normalization,
            3: self.number_norm1,
            4: self.number_compactness,
            5: self.e1_absolute_continuity,
            6: self.canonical_phase_norm1,
            7: self.phase_covariance,
            8: self.gaussian_halflines,
            9: self.bounded_position,
            10: self.smearing_identities,
            11: self.sampler_equivalence,
            12: self.e1_noncommutative,
        }

    def run(self, only: Optional[Sequence[int]] = None) -> ClaimsTable:
        """Compute every row (or the selected ones) in row order.

        Raises:
            ReproductionError: If a row cannot be computed
        """
        rows = self.rows()
        selected = sorted(only) if only else sorted(rows)
        unknown = [r for r in selected if r not in rows]
        if unknown:
            raise ReproductionError(f"unknown claim rows {unknown}")
        logger.info(f"Reproducing {len(selected)} claims with seed {self.seed}")
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            results = list(pool.map(lambda r: self._run_row(r, rows[r]), selected))
        parameters = {"eps": self.eps, "dims": self.dims, "workers": self.workers}
        return ClaimsTable(rows=results, parameters=parameters, seed=self.seed)

    def _run_row(self, row: int, compute: Callable[[], ClaimRow]) -> ClaimRow:
        try:
            result = compute()
        except (AnalyzerError, CatalogError, KernelError, OperatorError, POVMError,
                SamplingError, SetError) as e:
            raise ReproductionError(f"Row {row} failed: {str(e)}") from e
        logger.info(f"Row {row}: {result.status}")
        return result

    def _row(self, row: int, measured: Dict[str, Any], status: ClaimStatus,
             note: Optional[str] = None) -> ClaimRow:
        return ClaimRow(row=row, claim=CLAIMS[row], measured=measured, status=status, note=note)

    def gaussian_lipschitz(self) -> ClaimRow:
        grid = np.linspace(-4.0, 4.0, 161)
        sets = random_family("intervals", 100, self.seed, low=-3.0, high=3.0)
        measured = {}
        passed = True
        for width in LIPSCHITZ_WIDTHS:
            kernel = GaussianKernel(width)
            bound = kernel.lipschitz_bound(LIPSCHITZ_STEP)
            constant = kernel.lipschitz_bound(1.0)
            moduli = [continuity_modulus(kernel, delta, grid, LIPSCHITZ_STEP) for delta in sets]
            worst = max(m.value for m in moduli)
            worst_ratio = max(m.max_ratio for m in moduli)
            ok = worst <= bound + BOUND_TOL and worst_ratio <= constant + BOUND_TOL / LIPSCHITZ_STEP
            passed = passed and ok
            measured[f"l={width!r}"] = {"modulus": worst, "bound": bound,
                                        "max_ratio": worst_ratio, "constant": constant}
        return self._row(1, measured, _status(passed))

    def binomial_normalization(self) -> ClaimRow:
        trials = np.arange(BINOMIAL_TRIALS + 1, dtype=float)
        outcomes = NatSet.of(range(BINOMIAL_TRIALS + 1))
        measured = {}
        for eps in BINOMIAL_EPS:
            sums = BinomialKernel(eps).evaluate_many(trials, outcomes, clip=False)
            measured[f"eps={eps!r}"] = float(np.max(np.abs(sums - 1.0)))
        passed = all(error <= EXACT_TOL for error in measured.values())
        return self._row(2, {"max_normalization_error": measured}, _status(passed))

    def number_norm1(self) -> ClaimRow:
        povm = unsharp_number(self.eps, NUMBER_DIM)
        ground = povm.norm(NatSet.singleton(0))
        maxima, oracle_error = [], 0.0
        for n in range(1, NUMBER_LEVELS + 1):
            value = povm.norm(NatSet.singleton(n))
            oracle = max(math.comb(m, n) * self.eps ** n * (1.0 - self.eps) ** (m - n)
                         for m in range(n, NUMBER_DIM))
            maxima.append(value)
            oracle_error = max(oracle_error, abs(value - oracle))
        passed = abs(ground - 1.0) <= EXACT_TOL and max(maxima) < 1.0 - EXACT_TOL and oracle_error <= EXACT_TOL
        return self._row(3, {"eps": self.eps, "dim": NUMBER_DIM, "norm_F0": ground,
                             "max_eigenvalues": maxima, "oracle_error": oracle_error},
                         _status(passed))

    def number_compactness(self) -> ClaimRow:
        dims = self.dims or list(COMPACTNESS_DIMS)
        residual_set = NatSet.of(range(RESIDUAL_CUT + 1), cofinite=True)
        report = self.analyzer.dimension_scaling(
            lambda dim: unsharp_number(self.eps, dim), dims, lambda povm: povm.norm(residual_set),
            f"norm of {residual_set.to_text()}")
        oracle = [float(np.max(binomial_tail(RESIDUAL_CUT, np.arange(dim), self.eps))) for dim in dims]
        oracle_error = max(abs(a - b) for a, b in zip(report.values, oracle))
        verdict = Verdict(report.verdict)
        passed = oracle_error <= EXACT_TOL and (len(dims) < 2 or _shows_obstruction(report))
        return self._row(4, {"dims": dims, "residual_norms": report.values, "oracle": oracle,
                             "oracle_error": oracle_error, "verdict": verdict.value},
                         _status(passed, len(dims) < 2),
                         note="insufficient dimensions" if len(dims) < 2 else None)

    def e1_absolute_continuity(self) -> ClaimRow:
        povm = e1_phase(64)
        bound = 3.0 / TWO_PI
        arcs = random_family("arcs", 200, self.seed)
        fit = self.analyzer.absolute_continuity_fit(povm, ReferenceMeasure.lebesgue_circle(), arcs)
        excess = max(povm.norm(delta) - bound * delta.length for delta in arcs)
        family = shrinking_family("shrinking-arc", 20)
        probe = self.analyzer.uniform_continuity_probe(povm, family, "shrinking-arc:count=20")
        verdict = Verdict(probe.verdict)
        passed = excess <= BOUND_TOL and verdict == Verdict.DECAYS
        return self._row(5, {"dim": 64, "c_hat": fit.c_hat, "bound": bound, "max_excess": excess,
                             "probe_norms": probe.norms, "decay_rate": probe.decay_rate,
                             "verdict": verdict.value}, _status(passed))

    def canonical_phase_norm1(self) -> ClaimRow:
        dims = self.dims or list(PHASE_DIMS)
        probe_set = self.spec_parser.parse_sets(PHASE_PROBE, SetKind.CIRCLE)[0]
        report = self.analyzer.dimension_scaling(canonical_phase, dims, lambda povm: povm.norm(probe_set),
                                                 f"norm of {probe_set.to_text()}")
        points = [0.0, 1.0, math.pi, 5.0]
        povm = canonical_phase(dims[-1])
        singletons = [povm.norm(CircleSet.singleton(x)) for x in points]
        verdict = Verdict(report.verdict)
        passed = all(v == 0.0 for v in singletons) and (len(dims) < 2 or _shows_obstruction(report))
        return self._row(6, {"dims": report.dims, "norms": report.values, "verdict": verdict.value,
                             "singleton_norms": singletons},
                         _status(passed, len(dims) < 2),
                         note="insufficient dimensions" if len(dims) < 2 else None)

    def phase_covariance(self) -> ClaimRow:
        rng = make_rng(self.seed)
        thetas = rng.uniform(0.0, TWO_PI, size=50)
        arcs = random_family("arcs", 50, self.seed)
        measured = {}
        for name, povm in (("phase-e1", e1_phase(64)), ("phase-can", canonical_phase(64))):
            measured[name] = max(covariance_check(povm, [theta], [delta]).max_deviation
                                 for theta, delta in zip(thetas, arcs))
        passed = all(v <= COVARIANCE_TOL for v in measured.values())
        return self._row(7, {"dim": 64, "pairs": 50, "max_deviation": measured}, _status(passed))

    def gaussian_halflines(self) -> ClaimRow:
        localization = [halfline_localization(1.0, -1.0, n) for n in range(1, 41)]
        povm = gaussian_unsharp_position(1.0, -50.0, 0.0, 500)
        family = shrinking_family("escaping-halfline", 20)
        probe = self.analyzer.uniform_continuity_probe(povm, family, "escaping-halfline:count=20")
        singletons = [LineSet.singleton(x) for x in (-10.0, -1.0, 0.0)]
        scan = self.analyzer.norm1_scan(povm, family, singletons)
        verdict = Verdict(probe.verdict)
        passed = (localization[-1] >= HALFLINE_LEVEL and is_nondecreasing(localization)
                  and min(probe.norms) >= PERSIST_NORM and verdict == Verdict.PERSISTS
                  and scan.point_mass_condition is False)
        return self._row(8, {"localization_n40": localization[-1], "halfline_norms": probe.norms,
                             "verdict": verdict.value,
                             "singleton_norms": [item.value for item in scan.singleton_norms],
                             "point_mass_condition": scan.point_mass_condition}, _status(passed))

    def bounded_position(self) -> ClaimRow:
        povm = bounded_unsharp_position(grid=200)
        nu = self.spec_parser.parse_measure("weighted:M=1.5,window=-1:1")
        sets = random_family("intervals", 200, self.seed)
        fit = self.analyzer.absolute_continuity_fit(povm, nu, sets)
        family = shrinking_family("nested-interval", 50)
        probe = self.analyzer.uniform_continuity_probe(povm, family, "nested-interval:count=50")
        excess = max(norm - 1.5 / i for i, norm in enumerate(probe.norms, start=1))
        verdict = Verdict(probe.verdict)
        c_hat = fit.c_hat if fit.c_hat is not None else math.inf
        passed = c_hat <= 1.0 + BOUND_TOL and not fit.failures and excess <= BOUND_TOL \
            and verdict == Verdict.DECAYS
        return self._row(9, {"c_hat": fit.c_hat, "measure": fit.measure, "probe_norms": probe.norms,
                             "max_excess_over_bound": excess, "decay_rate": probe.decay_rate,
                             "verdict": verdict.value}, _status(passed))

    def _random_hermitian(self, dim: int) -> HermitianOperator:
        rng = make_rng(self.seed)
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return HermitianOperator.symmetrized(a)

    def smearing_identities(self) -> ClaimRow:
        measure = SpectralMeasure.from_operator(self._random_hermitian(8))
        sharp = smear(measure, point_kernel(SetKind.LINE), "point-smeared")
        family = random_family("intervals", 30, self.seed, low=-6.0, high=6.0)
        pvm = self.analyzer.is_pvm(sharp, family)
        difference = 0.0
        for delta in family:
            weights = np.array([1.0 if delta.contains(float(p)) else 0.0 for p in measure.points])
            projection = measure.compose(weights[measure.labels])
            difference = max(difference, operator_norm(
                HermitianOperator.symmetrized(sharp.matrix(delta) - projection)))

        line_partition = self.spec_parser.parse_partition("grid:lower=-3,upper=3,cells=8", SetKind.LINE)
        nat_partition = self.spec_parser.parse_partition("nat:cells=10", SetKind.NATURALS)
        smeared = {
            "point-smeared": (sharp, line_partition, family),
            "unsharp-number": (unsharp_number(self.eps, 60), nat_partition,
                               random_family("nat", 20, self.seed)),
            "bounded-pos": (bounded_unsharp_position(grid=100), line_partition,
                            random_family("intervals", 20, self.seed, low=-1.0, high=2.0)),
            "gauss-pos": (gaussian_unsharp_position(1.0, -3.0, 3.0, 61), line_partition,
                          random_family("intervals", 20, self.seed)),
        }
        axioms, commutators = {}, {}
        for name, (povm, partition, sets) in smeared.items():
            report = self.analyzer.check_povm_axioms(povm, partition, extra_pairs=5)
            axioms[name] = {"normalization": report.normalization_error,
                            "additivity": report.additivity_error, "passed": report.passed}
            commutators[name] = self.analyzer.check_commutative(povm, sets, pairs_budget=100).max_norm
        passed = (pvm.is_pvm and difference <= EXACT_TOL
                  and all(a["passed"] for a in axioms.values())
                  and all(c <= COMMUTE_TOL for c in commutators.values()))
        return self._row(10, {"is_pvm": pvm.is_pvm, "pvm_difference": difference,
                              "axioms": axioms, "commutators": commutators}, _status(passed))

    def sampler_equivalence(self) -> ClaimRow:
        povm = gaussian_unsharp_position(1.0, -3.0, 3.0, 61)
        partition = self.spec_parser.parse_partition("grid:lower=-3,upper=3,cells=8", SetKind.LINE)
        state = State.uniform(povm.dim)
        probs = self.sampler.born_probabilities(povm, state, partition)
        law = self.sampler.two_stage_law(povm.spectral_measure, povm.kernel, state, partition)
        marginal = float(np.max(np.abs(law - probs)))
        direct = self.sampler.sample_direct(povm, state, partition, SAMPLE_SIZE, self.seed)
        two_stage = self.sampler.sample_two_stage(povm.spectral_measure, povm.kernel, state,
                                                  partition, SAMPLE_SIZE, self.seed + 1)
        comparison = self.sampler.compare_histograms(direct, two_stage)
        passed = marginal <= EXACT_TOL and comparison.passed
        return self._row(11, {"samples": SAMPLE_SIZE, "marginal_deviation": marginal,
                              "chi_square": comparison.statistic, "quantile": comparison.quantile,
                              "dof": comparison.dof, "direct_counts": direct.counts,
                              "two_stage_counts": two_stage.counts}, _status(passed))

    def e1_noncommutative(self) -> ClaimRow:
        povm = e1_phase(16)
        arcs = [CircleSet.arc(0.0, math.pi), CircleSet.arc(math.pi / 2, 3 * math.pi / 2)]
        result = self.analyzer.check_commutative(povm, arcs)
        return self._row(12, {"dim": 16, "commutator_norm": result.max_norm,
                              "level": NONCOMMUTE_LEVEL},
                         _status(result.max_norm > NONCOMMUTE_LEVEL))

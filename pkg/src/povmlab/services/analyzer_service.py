"""
Analyzers for structural properties of POVMs: commutativity, orthogonality, PVM
detection, spectrum, absolute continuity, the norm-1 property, continuity probes,
dimension scaling and operator integrals.

At a fixed truncation every POVM is uniformly continuous, so claims about the
untruncated observable are judged from dimension scaling trends only.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import linalg

from ..models.operators import (
    HermitianOperator, OperatorError, State, classify, commutator_norm, operator_norm,
    top_eigenvector, OperatorClass,
)
from ..models.povm import POVM, POVMError
from ..models.reports import (
    AbsoluteContinuityFit, ContinuityReport, Norm1Report, PairResult, PovmAxiomReport,
    ProbeMode, PVMResult, ScalingReport, SetValue, SpectrumEstimate, Verdict,
)
from ..models.sets import (
    CircleSet, LineSet, MeasurableSet, NatSet, ReferenceMeasure, SetError, SetKind,
    difference, intersection, is_subset, measure, union, union_all,
)
from ..utils.numeric_utils import (
    is_nondecreasing, is_nonincreasing, make_rng, power_law_exponent,
)
from ..validators.partition_validator import PartitionValidationError, PartitionValidator

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-9
PVM_TOL = 1e-8
NORM1_TOL = 1e-6
AXIOM_TOL = 1e-9
DECAY_FACTOR = 0.01
DECAY_RATE = 0.5
PERSIST_LEVEL = 0.9
OBSTRUCTION_LEVEL = 0.9
UC_GROWTH = 1.1
MONOTONE_TOL = 1e-12


class AnalyzerError(Exception):
    """Exception raised for invalid analyzer inputs and failed analyses."""
    pass


class IntegrationResult(BaseModel):
    """Riemann–Stieltjes sum Σ_j f(t_j) F(Δ_j) with its refinement check."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    operator: HermitianOperator
    refined: HermitianOperator
    refinement_difference: float
    tags: List[float]


def continuity_verdict(norms: Sequence[float]) -> Tuple[Verdict, float, bool]:
    """Verdict of a norm sequence s_1..s_n.

    ``decays`` needs a nonincreasing tail (last half) and either s_n < 0.01·s_1 or a
    tail exponent r ≥ 0.5 in s_i ~ i^(−r); ``persists`` needs s_n ≥ 0.9·s_1 and r < 0.5.

    Returns:
        Tuple[Verdict, float, bool]: Verdict, fitted tail exponent, tail monotonicity
    """
    values = [float(v) for v in norms]
    if not values:
        return Verdict.INCONCLUSIVE, 0.0, True
    if all(v <= 0.0 for v in values):
        return Verdict.DECAYS, math.inf, True
    first, last = values[0], values[-1]
    start = len(values) // 2 if len(values) >= 4 else 0
    tail = values[start:]
    indices = list(range(start + 1, len(values) + 1))
    rate = power_law_exponent(tail, indices)
    monotone = is_nonincreasing(tail, MONOTONE_TOL * max(first, 1e-300))
    if len(values) < 2 or first <= 0.0:
        return Verdict.INCONCLUSIVE, rate, monotone
    if monotone and (last < DECAY_FACTOR * first or rate >= DECAY_RATE):
        return Verdict.DECAYS, rate, monotone
    if last >= PERSIST_LEVEL * first and rate < DECAY_RATE:
        return Verdict.PERSISTS, rate, monotone
    return Verdict.INCONCLUSIVE, rate, monotone


def scaling_verdict(values: Sequence[float]) -> Verdict:
    """Trend verdict of probe values over increasing dimensions."""
    if len(values) < 2:
        return Verdict.INCONCLUSIVE
    if is_nondecreasing(values, MONOTONE_TOL) and values[-1] >= OBSTRUCTION_LEVEL:
        return Verdict.OBSTRUCTION
    if values[-1] < OBSTRUCTION_LEVEL and values[-1] <= UC_GROWTH * values[0]:
        return Verdict.UC_EVIDENCE
    return Verdict.INCONCLUSIVE


def _ball(kind: SetKind, x: float, radius: float) -> MeasurableSet:
    if kind == SetKind.NATURALS:
        return NatSet.singleton(int(x))
    if kind == SetKind.CIRCLE:
        if radius >= math.pi:
            return CircleSet.full()
        return CircleSet.open_arc(x - radius, x + radius)
    return LineSet.open_interval(x - radius, x + radius)


def _tag(delta: MeasurableSet, rule: str = "left") -> float:
    """Tag point t ∈ Δ used by Riemann–Stieltjes sums."""
    if isinstance(delta, NatSet):
        if not delta.is_cofinite:
            return float(delta.members[0])
        n = 0
        while n in delta.members:
            n += 1
        return float(n)
    for p in delta.atoms:
        if not delta.intervals or p < delta.intervals[0][0]:
            return p
    a, b = delta.intervals[0]
    if rule == "right" and math.isfinite(b):
        return b - 1e-9 * max(1.0, abs(b))
    if rule == "mid" and math.isfinite(a) and math.isfinite(b):
        return 0.5 * (a + b)
    if math.isfinite(a) and a not in delta.punctures:
        return a
    if math.isfinite(a) and math.isfinite(b):
        return 0.5 * (a + b)
    if math.isfinite(b):
        return b - 1.0
    return 0.0 if math.isinf(a) else a + 1.0


def _refine(delta: MeasurableSet) -> List[MeasurableSet]:
    """Split a cell into the halves of its bounded intervals."""
    if isinstance(delta, NatSet):
        return [delta]
    halves = [(a, 0.5 * (a + b)) for a, b in delta.intervals if math.isfinite(a) and math.isfinite(b)]
    if not halves:
        return [delta]
    cls = type(delta)
    left = intersection(delta, cls(intervals=tuple(halves)))
    right = difference(delta, left)
    return [part for part in (left, right) if not part.is_empty]


class POVMAnalyzer:
    """Analyzer for POVM structural properties."""

    def __init__(self, workers: int = 1, seed: Optional[int] = None):
        """Initialize the analyzer.

        Args:
            workers: Threads used by dimension scaling
            seed: Seed of pair sampling
        """
        self.workers = max(1, workers)
        self.seed = seed
        self.partition_validator = PartitionValidator()

    def _operators(self, povm: POVM, family: Sequence[MeasurableSet]) -> List[HermitianOperator]:
        return [povm.operator(delta) for delta in family]

    def _pairs(self, count: int, budget: Optional[int]) -> List[Tuple[int, int]]:
        pairs = list(itertools.combinations(range(count), 2))
        if budget is None or len(pairs) <= budget:
            return pairs
        rng = make_rng(self.seed)
        chosen = sorted(rng.choice(len(pairs), size=budget, replace=False))
        return [pairs[i] for i in chosen]

    def check_commutative(self, povm: POVM, family: Sequence[MeasurableSet],
                          pairs_budget: Optional[int] = None) -> PairResult:
        """Max commutator norm ‖[F(Δ₁), F(Δ₂)]‖ over (sampled) pairs of the family.

        Raises:
            AnalyzerError: If the family is empty
        """
        if not family:
            raise AnalyzerError("commutativity check needs a non-empty family")
        ops = self._operators(povm, family)
        best = PairResult(max_norm=0.0)
        pairs = self._pairs(len(family), pairs_budget)
        for i, j in pairs:
            value = commutator_norm(ops[i], ops[j])
            if value > best.max_norm:
                best = PairResult(max_norm=value, worst_pair=(family[i].to_text(), family[j].to_text()))
        logger.debug(f"Commutativity of {povm.description}: {best.max_norm!r} over {len(pairs)} pairs")
        return best.model_copy(update={"pairs_checked": len(pairs)})

    def check_orthogonal(self, povm: POVM,
                         pairs: Sequence[Tuple[MeasurableSet, MeasurableSet]]) -> PairResult:
        """Max ‖F(Δ₁)F(Δ₂)‖ over disjoint pairs; zero exactly for PVMs.

        Raises:
            AnalyzerError: If a pair is not disjoint
        """
        best = PairResult(max_norm=0.0)
        for first, second in pairs:
            if not intersection(first, second).is_empty:
                raise AnalyzerError(f"sets {first} and {second} are not disjoint")
            product = povm.matrix(first) @ povm.matrix(second)
            value = float(linalg.svdvals(product)[0])
            if value > best.max_norm:
                best = PairResult(max_norm=value, worst_pair=(first.to_text(), second.to_text()))
        return best.model_copy(update={"pairs_checked": len(pairs)})

    def is_pvm(self, povm: POVM, family: Sequence[MeasurableSet]) -> PVMResult:
        """True iff ‖F(Δ)² − F(Δ)‖ ≤ 1e-8 on every family member.

        Raises:
            AnalyzerError: If the family is empty
        """
        if not family:
            raise AnalyzerError("PVM check needs a non-empty family")
        worst_value, worst_set = 0.0, family[0].to_text()
        for delta in family:
            values = povm.operator(delta).eigenvalues()
            defect = float(np.max(np.abs(values * values - values)))
            if defect > worst_value:
                worst_value, worst_set = defect, delta.to_text()
        return PVMResult(is_pvm=worst_value <= PVM_TOL, witness_set=worst_set, witness_value=worst_value)

    def spectrum_estimate(self, povm: POVM, grid: Sequence[float],
                          radii: Sequence[float]) -> SpectrumEstimate:
        """Grid points x with ‖F(ball(x, r))‖ > 1e-9 for every tested radius.

        Balls are open intervals (arcs); on the naturals a ball is the singleton.

        Raises:
            AnalyzerError: If radii are not positive and strictly decreasing
        """
        radii = [float(r) for r in radii]
        if not radii or any(r <= 0 for r in radii) or any(b >= a for a, b in zip(radii, radii[1:])):
            raise AnalyzerError("radii must be positive and strictly decreasing")
        detected = []
        for x in grid:
            if all(povm.norm(_ball(povm.kind, float(x), r)) > ZERO_TOL for r in radii):
                detected.append(float(x))
        return SpectrumEstimate(points=detected, radii=radii)

    def absolute_continuity_fit(self, povm: POVM, nu: ReferenceMeasure,
                                family: Sequence[MeasurableSet]) -> AbsoluteContinuityFit:
        """Fit c_hat = max ‖F(Δ)‖/ν(Δ) over members with 0 < ν(Δ) < ∞.

        Members with ν(Δ) = ∞ are skipped; members with ν(Δ) = 0 and F(Δ) ≠ 0 are
        absolute-continuity failures.
        """
        fit = AbsoluteContinuityFit(measure=nu.describe())
        best = None
        for delta in family:
            try:
                size = measure(nu, delta)
            except SetError as e:
                raise AnalyzerError(f"Failed to measure {delta}: {str(e)}")
            text = delta.to_text()
            if math.isinf(size):
                fit.skipped.append(text)
                continue
            norm = povm.norm(delta)
            if size == 0.0:
                if norm > ZERO_TOL:
                    fit.failures.append(text)
                continue
            ratio = norm / size
            fit.ratios.append(SetValue(set=text, value=ratio))
            if best is None or ratio > best:
                best = ratio
                fit.extremal_set = text
        fit.c_hat = best
        if fit.skipped:
            logger.info(f"Skipped {len(fit.skipped)} family members of infinite measure")
        return fit

    def uniform_continuity_probe(self, povm: POVM, family: Sequence[MeasurableSet],
                                 description: str = "", mode: ProbeMode = ProbeMode.FROM_ABOVE,
                                 limit: Optional[MeasurableSet] = None) -> ContinuityReport:
        """Norm sequence ‖F(Δ_i)‖ for Δ_i decreasing, or ‖F(Δ) − F(Δ_i)‖ for Δ_i ↑ Δ.

        Raises:
            AnalyzerError: If the family is empty or not monotone
        """
        if not family:
            raise AnalyzerError("continuity probe needs a non-empty family")
        mode = ProbeMode(mode)
        for i in range(len(family) - 1):
            smaller, larger = (family[i + 1], family[i]) if mode == ProbeMode.FROM_ABOVE \
                else (family[i], family[i + 1])
            if not is_subset(smaller, larger):
                raise AnalyzerError(f"family is not monotone at member {i + 1}")
        if mode == ProbeMode.FROM_BELOW:
            if limit is None:
                raise AnalyzerError("from-below probe needs the limit set")
            if not is_subset(family[-1], limit):
                raise AnalyzerError("family members must lie inside the limit set")
            top = povm.matrix(limit)
            norms = [operator_norm(HermitianOperator(top - povm.matrix(delta), check=False))
                     for delta in family]
        else:
            norms = [povm.norm(delta) for delta in family]
        norms = [max(0.0, n) for n in norms]
        verdict, rate, monotone = continuity_verdict(norms)
        logger.info(f"Continuity probe on {povm.description}: {verdict.value} "
                    f"(first={norms[0]!r}, last={norms[-1]!r}, rate={rate!r})")
        return ContinuityReport(family=description, mode=mode,
                                limit=limit.to_text() if limit is not None else None,
                                norms=norms, decay_rate=rate,
                                monotone_tail=monotone, verdict=verdict)

    def dimension_scaling(self, builder: Callable[[int], POVM], dims: Sequence[int],
                          probe: Callable[[POVM], float], probe_name: str = "probe") -> ScalingReport:
        """Evaluate a probe on the observable rebuilt at each dimension.

        Dimensions run on a thread pool; results keep the order of ``dims``.

        Raises:
            AnalyzerError: If dims are not strictly increasing or a build fails
        """
        dims = [int(d) for d in dims]
        if not dims or any(b <= a for a, b in zip(dims, dims[1:])):
            raise AnalyzerError("dimensions must be non-empty and strictly increasing")

        def evaluate(dim: int) -> float:
            try:
                value = float(probe(builder(dim)))
            except Exception as e:
                raise AnalyzerError(f"Scaling failed at D={dim}: {str(e)}") from e
            logger.debug(f"Scaling probe {probe_name} at D={dim}: {value!r}")
            return value

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            values = list(pool.map(evaluate, dims))
        verdict = scaling_verdict(values)
        logger.info(f"Dimension scaling of {probe_name} over {dims}: {verdict.value}")
        return ScalingReport(probe=probe_name, dims=dims, values=values, verdict=verdict)

    def norm1_scan(self, povm: POVM, family: Sequence[MeasurableSet],
                   singletons: Sequence[MeasurableSet] = ()) -> Norm1Report:
        """Norms of non-vanishing effects on a family plus singleton probes.

        The family has the norm-1 property iff every ‖F(Δ)‖ > 1e-9 is at least 1 − 1e-6.
        The point-mass condition holds iff every singleton probe has ‖F({x})‖ > 1e-9.

        Raises:
            AnalyzerError: If the family is empty
        """
        if not family:
            raise AnalyzerError("norm-1 scan needs a non-empty family")
        norms, zero_sets = [], []
        for delta in family:
            value = povm.norm(delta)
            if value > ZERO_TOL:
                norms.append(SetValue(set=delta.to_text(), value=value))
            else:
                zero_sets.append(delta.to_text())
        singleton_norms = [SetValue(set=s.to_text(), value=povm.norm(s)) for s in singletons]
        condition = None
        if singleton_norms:
            condition = all(item.value > ZERO_TOL for item in singleton_norms)
        return Norm1Report(norms=norms, zero_sets=zero_sets,
                           norm1_on_family=all(item.value >= 1.0 - NORM1_TOL for item in norms),
                           singleton_norms=singleton_norms, point_mass_condition=condition)

    def norm1_witness(self, povm: POVM, delta: MeasurableSet) -> Tuple[float, State]:
        """Unit vector ψ with ⟨ψ, F(Δ)ψ⟩ = ‖F(Δ)‖ (top eigenvector)."""
        value, vector = top_eigenvector(povm.operator(delta))
        return value, State.normalized(vector)

    def _require_partition(self, partition: Sequence[MeasurableSet], kind: SetKind) -> None:
        try:
            self.partition_validator.require_partition(partition, kind)
        except PartitionValidationError as e:
            raise AnalyzerError(f"Invalid partition: {str(e)}")

    def integrate(self, povm: POVM, function: Callable[[float], float],
                  partition: Sequence[MeasurableSet], tag: str = "left") -> IntegrationResult:
        """Σ_j f(t_j) F(Δ_j) with t_j ∈ Δ_j, plus the same sum on a halved refinement.

        Args:
            povm: POVM to integrate against
            function: Bounded function f
            partition: Finite disjoint cover of the domain
            tag: Tag rule: left, right or mid

        Raises:
            AnalyzerError: Invalid partition or a non-finite sample of f
        """
        if tag not in ("left", "right", "mid"):
            raise AnalyzerError(f"unknown tag rule '{tag}'")
        self._require_partition(partition, povm.kind)

        def riemann_sum(cells: Sequence[MeasurableSet]):
            total = np.zeros((povm.dim, povm.dim), dtype=np.complex128)
            tags = []
            for cell in cells:
                t = _tag(cell, tag)
                value = float(function(t))
                if not math.isfinite(value):
                    raise AnalyzerError(f"integrand is unbounded at {t!r} (value {value!r})")
                tags.append(t)
                total += value * povm.matrix(cell)
            return HermitianOperator.symmetrized(total), tags

        coarse, tags = riemann_sum(partition)
        refined, _ = riemann_sum([part for cell in partition for part in _refine(cell)])
        difference_norm = operator_norm(refined - coarse)
        return IntegrationResult(operator=coarse, refined=refined,
                                 refinement_difference=difference_norm, tags=tags)

    def check_povm_axioms(self, povm: POVM, partition: Sequence[MeasurableSet],
                          extra_pairs: int = 0) -> PovmAxiomReport:
        """Normalization, finite additivity on disjoint pairs and effect classification.

        Adjacent cells are always paired; ``extra_pairs`` random disjoint pairs are added.
        """
        self._require_partition(partition, povm.kind)
        identity = np.eye(povm.dim)
        matrices = [povm.matrix(cell) for cell in partition]
        normalization = operator_norm(HermitianOperator.symmetrized(sum(matrices) - identity))
        normalization = max(normalization, operator_norm(
            HermitianOperator.symmetrized(povm.matrix(povm.full_set) - identity)))
        pairs = [(j, j + 1) for j in range(len(partition) - 1)]
        if extra_pairs:
            rng = make_rng(self.seed)
            for _ in range(extra_pairs):
                i, j = sorted(rng.choice(len(partition), size=2, replace=False))
                pairs.append((int(i), int(j)))
        additivity = 0.0
        for i, j in pairs:
            joined = povm.matrix(union(partition[i], partition[j]))
            additivity = max(additivity, operator_norm(
                HermitianOperator.symmetrized(joined - matrices[i] - matrices[j])))
        failures = []
        for cell, m in zip(partition, matrices):
            kind, _ = classify(HermitianOperator.symmetrized(m))
            if kind not in (OperatorClass.EFFECT, OperatorClass.PROJECTION):
                failures.append(cell.to_text())
        passed = normalization <= AXIOM_TOL and additivity <= AXIOM_TOL and not failures
        return PovmAxiomReport(normalization_error=normalization, additivity_error=additivity,
                               effect_failures=failures, passed=passed)

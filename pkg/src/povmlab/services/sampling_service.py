"""
Outcome sampling: direct Born sampling from a POVM and the two-stage randomization
(sharp value first, then a kernel reading).

Seed derivation: draws are split into fixed-size blocks; block b uses the b-th child
of ``SeedSequence(seed).spawn(n_blocks)``. Histograms therefore depend only on the
inputs and the seed, never on the number of workers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from ..models.kernels import MarkovKernel
from ..models.operators import State
from ..models.povm import POVM, SpectralMeasure
from ..models.reports import ChiSquareResult, FourSigmaResult, OutcomeHistogram
from ..models.sets import MeasurableSet, NatSet, SetKind
from ..utils.numeric_utils import derive_seeds
from ..validators.partition_validator import PartitionValidationError, PartitionValidator

logger = logging.getLogger(__name__)

BLOCK_SIZE = 10000
SUM_TOL = 1e-9
RANGE_TOL = 1e-10
CHI2_LEVEL = 0.999
SIGMA_LIMIT = 4.0


class SamplingError(Exception):
    """Exception raised for invalid sampling inputs."""
    pass


def cell_bounds(delta: MeasurableSet) -> Tuple[float, float]:
    """Smallest and largest point of a cell (inf for unbounded cells)."""
    if isinstance(delta, NatSet):
        if delta.is_cofinite:
            low = 0
            while low in delta.members:
                low += 1
            return float(low), math.inf
        return float(delta.members[0]), float(delta.members[-1])
    candidates = [a for a, _ in delta.intervals] + list(delta.atoms)
    uppers = [b for _, b in delta.intervals] + list(delta.atoms)
    return float(min(candidates)), float(max(uppers))


class OutcomeSampler:
    """Service for Born-rule outcome sampling."""

    def __init__(self, workers: int = 1, block_size: int = BLOCK_SIZE):
        """Initialize the sampler.

        Args:
            workers: Threads drawing blocks concurrently
            block_size: Draws per seeded block
        """
        self.workers = max(1, workers)
        self.block_size = block_size
        self.partition_validator = PartitionValidator()

    def _require_partition(self, partition: Sequence[MeasurableSet], kind: SetKind) -> None:
        try:
            self.partition_validator.require_partition(partition, kind)
        except PartitionValidationError as e:
            raise SamplingError(f"Invalid partition: {str(e)}")

    def born_probabilities(self, povm: POVM, state: State,
                           partition: Sequence[MeasurableSet]) -> np.ndarray:
        """p_j = ⟨ψ, F(Δ_j)ψ⟩ over a partition.

        Raises:
            SamplingError: Invalid partition, dimension mismatch or a non-normalized result
        """
        self._require_partition(partition, povm.kind)
        if state.dim != povm.dim:
            raise SamplingError(f"state dimension {state.dim} does not match {povm.dim}")
        psi = state.vector
        probs = np.array([float(np.real(np.vdot(psi, povm.matrix(cell) @ psi))) for cell in partition])
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise SamplingError(f"probabilities sum to {probs.sum()!r}")
        if probs.min() < -RANGE_TOL or probs.max() > 1.0 + RANGE_TOL:
            raise SamplingError("probabilities leave [0, 1] beyond tolerance")
        return np.clip(probs, 0.0, 1.0)

    def _blocks(self, total: int) -> List[int]:
        if total < 1:
            raise SamplingError(f"sample size must be at least 1, got {total}")
        sizes = [self.block_size] * (total // self.block_size)
        if total % self.block_size:
            sizes.append(total % self.block_size)
        return sizes

    def _run_blocks(self, total: int, seed: Optional[int], draw) -> np.ndarray:
        sizes = self._blocks(total)
        seeds = derive_seeds(seed, len(sizes))
        jobs = list(zip(sizes, seeds))
        logger.debug(f"Sampling {total} outcomes in {len(jobs)} blocks on {self.workers} workers")
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            counts = list(pool.map(lambda job: draw(job[0], np.random.Generator(np.random.PCG64(job[1]))), jobs))
        return np.sum(counts, axis=0)

    def _histogram(self, partition, counts, total, seed, mode, observable) -> OutcomeHistogram:
        bounds = [cell_bounds(cell) for cell in partition]
        return OutcomeHistogram(cells=[cell.to_text() for cell in partition],
                                lower=[b[0] for b in bounds], upper=[b[1] for b in bounds],
                                counts=[int(c) for c in counts], total=total, seed=seed,
                                mode=mode, observable=observable)

    def sample_from_probabilities(self, probs: np.ndarray, total: int, seed: Optional[int]) -> np.ndarray:
        """Counts of ``total`` i.i.d. categorical draws.

        Raises:
            SamplingError: If every probability is zero
        """
        probs = np.asarray(probs, dtype=float)
        if not probs.sum() > 0:
            raise SamplingError("probability vector is identically zero")
        probs = probs / probs.sum()

        def draw(size, rng):
            return np.bincount(rng.choice(probs.size, size=size, p=probs), minlength=probs.size)

        return self._run_blocks(total, seed, draw)

    def sample_direct(self, povm: POVM, state: State, partition: Sequence[MeasurableSet],
                      total: int, seed: Optional[int]) -> OutcomeHistogram:
        """Histogram of ``total`` draws from the Born probabilities."""
        probs = self.born_probabilities(povm, state, partition)
        counts = self.sample_from_probabilities(probs, total, seed)
        return self._histogram(partition, counts, total, seed, "direct", povm.description)

    def kernel_rows(self, measure: SpectralMeasure, kernel: MarkovKernel,
                    partition: Sequence[MeasurableSet]) -> np.ndarray:
        """Matrix R[k, j] = μ_Δj(λ_k)."""
        return np.column_stack([kernel.evaluate_many(measure.points, cell) for cell in partition])

    def two_stage_law(self, measure: SpectralMeasure, kernel: MarkovKernel, state: State,
                      partition: Sequence[MeasurableSet]) -> np.ndarray:
        """Exact marginal Σ_k ⟨ψ, P_k ψ⟩ μ_Δj(λ_k)."""
        self._require_partition(partition, kernel.outcome_kind)
        return measure.weights(state) @ self.kernel_rows(measure, kernel, partition)

    def sample_two_stage(self, measure: SpectralMeasure, kernel: MarkovKernel, state: State,
                         partition: Sequence[MeasurableSet], total: int,
                         seed: Optional[int]) -> OutcomeHistogram:
        """Per draw: pick λ_k with probability ⟨ψ, P_k ψ⟩, then a cell with probability μ_Δj(λ_k).

        Raises:
            SamplingError: Invalid partition or degenerate sharp-value law
        """
        self._require_partition(partition, kernel.outcome_kind)
        weights = measure.weights(state)
        if not weights.sum() > 0:
            raise SamplingError("sharp-value law is identically zero")
        weights = weights / weights.sum()
        cumulative = np.cumsum(self.kernel_rows(measure, kernel, partition), axis=1)
        cells = cumulative.shape[1]

        def draw(size, rng):
            sharp = rng.choice(weights.size, size=size, p=weights)
            u = rng.random(size) * cumulative[sharp, -1]
            picked = np.minimum((u[:, None] >= cumulative[sharp]).sum(axis=1), cells - 1)
            return np.bincount(picked, minlength=cells)

        counts = self._run_blocks(total, seed, draw)
        return self._histogram(partition, counts, total, seed, "two-stage",
                               f"smear({measure.label}, {kernel.label})")

    def chi_square_against(self, histogram: OutcomeHistogram, probs: Sequence[float]) -> ChiSquareResult:
        """Goodness of fit of a histogram against exact probabilities."""
        counts = np.asarray(histogram.counts, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if probs.size != counts.size:
            raise SamplingError("one probability per histogram cell is required")
        support = probs > 0
        if np.any(counts[~support] > 0):
            return ChiSquareResult(statistic=math.inf, dof=int(support.sum()) - 1, p_value=0.0,
                                   quantile=math.inf, passed=False)
        observed = counts[support]
        expected = probs[support] / probs[support].sum() * histogram.total
        dof = observed.size - 1
        if dof < 1:
            return ChiSquareResult(statistic=0.0, dof=0, p_value=1.0, quantile=0.0, passed=True)
        statistic, p_value = stats.chisquare(observed, expected)
        quantile = float(stats.chi2.ppf(CHI2_LEVEL, dof))
        return ChiSquareResult(statistic=float(statistic), dof=dof, p_value=float(p_value),
                               quantile=quantile, passed=bool(statistic < quantile))

    def compare_histograms(self, first: OutcomeHistogram, second: OutcomeHistogram) -> ChiSquareResult:
        """Chi-square homogeneity test of two histograms on the same partition."""
        if first.cells != second.cells:
            raise SamplingError("histograms are on different partitions")
        table = np.array([first.counts, second.counts], dtype=float)
        table = table[:, table.sum(axis=0) > 0]
        dof = table.shape[1] - 1
        if dof < 1:
            return ChiSquareResult(statistic=0.0, dof=0, p_value=1.0, quantile=0.0, passed=True)
        statistic, p_value, dof, _ = stats.chi2_contingency(table, correction=False)
        quantile = float(stats.chi2.ppf(CHI2_LEVEL, dof))
        return ChiSquareResult(statistic=float(statistic), dof=int(dof), p_value=float(p_value),
                               quantile=quantile, passed=bool(statistic < quantile))

    def total_variation(self, histogram: OutcomeHistogram, probs: Sequence[float]) -> float:
        """½ Σ_j |c_j/N − p_j|."""
        return 0.5 * float(np.sum(np.abs(np.asarray(histogram.frequencies()) - np.asarray(probs))))

    def four_sigma_check(self, histogram: OutcomeHistogram, probs: Sequence[float]) -> FourSigmaResult:
        """Largest |c_j − N p_j| / sqrt(N p_j (1 − p_j)); cells with p ∈ {0, 1} must match exactly."""
        total = histogram.total
        worst, worst_cell = 0.0, None
        for j, (count, p) in enumerate(zip(histogram.counts, probs)):
            variance = total * p * (1.0 - p)
            deviation = abs(count - total * p)
            if variance <= 0:
                sigmas = 0.0 if deviation < 0.5 else math.inf
            else:
                sigmas = deviation / math.sqrt(variance)
            if sigmas > worst or worst_cell is None:
                worst, worst_cell = sigmas, j
        return FourSigmaResult(max_sigmas=worst, worst_cell=worst_cell, passed=worst <= SIGMA_LIMIT)

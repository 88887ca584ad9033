"""
Markov kernels μ: (λ, Δ) ↦ μ_Δ(λ) ∈ [0, 1].

Every kernel evaluates a set through its parts: the half-open intervals, then the
point masses of atoms (added) and punctures (removed). Continuous kernels give
points zero mass; the point kernel gives them full mass.
"""
import logging
import math
from abc import ABC, abstractmethod
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate

from .sets import (
    CircleSet, LineSet, MeasurableSet, NatSet, SetKind, first_overlap, full_set,
    union_all,
)
from ..utils.numeric_utils import ENDPOINT_TOL, binomial_pmf, normal_interval_mass

logger = logging.getLogger(__name__)

AXIOM_TOL = 1e-9
QUAD_TOL = 1e-10
WEIGHT_TOL = 1e-8


class KernelError(Exception):
    """Exception raised for invalid kernels and kernel inputs."""
    pass


class KernelDomain(str, Enum):
    """Where the sharp value λ lives."""
    LINE = "line-grid"
    UNIT_INTERVAL = "unit-interval"
    CIRCLE = "circle"
    NATURALS = "naturals"


class ModulusResult(BaseModel):
    """Empirical continuity modulus of λ ↦ μ_Δ(λ) on a grid."""
    applicable: bool = Field(..., description="False on discrete domains")
    value: float = Field(0.0, description="sup |μ_Δ(λ) − μ_Δ(λ')| over grid pairs with |λ − λ'| ≤ δ")
    max_ratio: float = Field(0.0, description="sup of the same differences divided by |λ − λ'|")
    pair: Optional[Tuple[float, float]] = Field(None, description="Grid pair attaining the value")
    pairs_checked: int = Field(0, description="Number of grid pairs inspected")


class KernelAxiomReport(BaseModel):
    """Probability-measure axioms of a kernel on a partition."""
    normalization_error: float = Field(..., description="max_λ |Σ_j μ_Δj(λ) − 1| and |μ_full(λ) − 1|")
    additivity_error: float = Field(..., description="max |μ_(A∪B) − μ_A − μ_B| over adjacent cells")
    range_violation: float = Field(..., description="Largest excursion of μ outside [0, 1]")
    passed: bool = Field(..., description="All errors at most 1e-9")


class MarkovKernel(ABC):
    """Base class: evaluator of μ_Δ(λ) with vectorized evaluation over λ."""

    domain: KernelDomain
    outcome_kind: SetKind
    label: str

    def evaluate(self, lam: float, delta: MeasurableSet) -> float:
        """μ_Δ(λ) for a single λ."""
        return float(self.evaluate_many(np.array([lam], dtype=float), delta)[0])

    def evaluate_many(self, lams, delta: MeasurableSet, clip: bool = True) -> np.ndarray:
        """μ_Δ(λ) for every λ in ``lams``.

        Args:
            lams: Sharp values inside the kernel domain
            delta: Outcome set of the kernel's outcome domain
            clip: Clip rounding excursions into [0, 1]

        Returns:
            np.ndarray: Kernel values

        Raises:
            KernelError: If the set or a λ is outside the kernel's domains
        """
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        if delta.kind != self.outcome_kind:
            raise KernelError(f"{self.label} kernel expects {self.outcome_kind.value} sets, "
                              f"got {delta.kind.value}")
        self.check_points(lams)
        if isinstance(delta, NatSet):
            values = self._nat_mass(lams, delta.members)
            if delta.is_cofinite:
                values = self._nat_total(lams) - values
        else:
            values = np.zeros_like(lams)
            for a, b in delta.intervals:
                values = values + self._interval_mass(lams, a, b)
            for p in delta.points:
                mass = self._point_mass(lams, p)
                values = values - mass if delta.in_intervals(p) else values + mass
        if clip:
            values = np.clip(values, 0.0, 1.0)
        return values

    def check_points(self, lams: np.ndarray) -> None:
        """Reject sharp values outside the kernel domain."""
        if not np.all(np.isfinite(lams)):
            raise KernelError(f"{self.label} kernel: sharp values must be finite")
        if self.domain == KernelDomain.UNIT_INTERVAL:
            if np.any(lams < -ENDPOINT_TOL) or np.any(lams > 1.0 + ENDPOINT_TOL):
                raise KernelError(f"{self.label} kernel: sharp values must lie in [0, 1]")
        elif self.domain == KernelDomain.NATURALS:
            if np.any(lams < 0) or np.any(lams != np.round(lams)):
                raise KernelError(f"{self.label} kernel: sharp values must be naturals")

    @abstractmethod
    def _interval_mass(self, lams: np.ndarray, a: float, b: float) -> np.ndarray:
        """μ_[a,b)(λ)."""

    def _point_mass(self, lams: np.ndarray, p: float) -> np.ndarray:
        return np.zeros_like(lams)

    def _nat_mass(self, lams: np.ndarray, members: Sequence[int]) -> np.ndarray:
        raise KernelError(f"{self.label} kernel does not act on natural-number sets")

    def _nat_total(self, lams: np.ndarray) -> np.ndarray:
        return np.ones_like(lams)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.label})"


class GaussianKernel(MarkovKernel):
    """μ_Δ(x) = ∫_Δ N(x, l²)(dy), evaluated through the normal CDF."""

    domain = KernelDomain.LINE
    outcome_kind = SetKind.LINE

    def __init__(self, width: float):
        if not width > 0 or math.isinf(width):
            raise KernelError(f"gaussian kernel width must be positive and finite, got {width}")
        self.width = float(width)
        self.label = f"gaussian(l={self.width!r})"

    def _interval_mass(self, lams, a, b):
        return normal_interval_mass((a - lams) / self.width, (b - lams) / self.width)

    def lipschitz_bound(self, step: float) -> float:
        """Lipschitz bound √2/(l√π)·δ of x ↦ μ_Δ(x) for intervals."""
        return math.sqrt(2.0) / (self.width * math.sqrt(math.pi)) * step


class BinomialKernel(MarkovKernel):
    """μ_{n}(m) = C(m, n) ε^n (1 − ε)^(m − n), zero for n > m."""

    domain = KernelDomain.NATURALS
    outcome_kind = SetKind.NATURALS

    def __init__(self, eps: float):
        if not 0.0 < eps < 1.0:
            raise KernelError(f"binomial kernel needs 0 < eps < 1, got {eps}")
        self.eps = float(eps)
        self.label = f"binomial(eps={self.eps!r})"

    def _interval_mass(self, lams, a, b):
        raise KernelError("binomial kernel does not act on line sets")

    def _nat_mass(self, lams, members):
        if not members:
            return np.zeros_like(lams)
        n = np.asarray(members, dtype=float)[:, None]
        return binomial_pmf(n, lams[None, :], self.eps).sum(axis=0)


class KernelWeight:
    """Probability density f on [0, 1], bounded by M, for the convolution kernel."""

    def __init__(self, density: Callable[[np.ndarray], np.ndarray], bound: float,
                 antiderivative: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 name: str = "custom", check: bool = True):
        self.density = density
        self.bound = float(bound)
        self.antiderivative = antiderivative
        self.name = name
        if check:
            self.validate()

    @classmethod
    def default(cls) -> "KernelWeight":
        """f(y) = 6y(1 − y), M = 1.5."""
        return cls(lambda y: 6.0 * y * (1.0 - y), 1.5,
                   antiderivative=lambda u: 3.0 * u ** 2 - 2.0 * u ** 3, name="default")

    @classmethod
    def uniform(cls) -> "KernelWeight":
        return cls(lambda y: np.ones_like(np.asarray(y, dtype=float)), 1.0,
                   antiderivative=lambda u: u, name="uniform")

    def validate(self) -> None:
        """Check f ≥ 0, max f ≤ M and ∫f = 1 within 1e-8.

        Raises:
            KernelError: If the weight is invalid
        """
        grid = np.linspace(0.0, 1.0, 2001)
        values = np.asarray(self.density(grid), dtype=float)
        if not np.all(np.isfinite(values)):
            raise KernelError(f"weight '{self.name}' has non-finite values")
        if values.min() < -WEIGHT_TOL:
            raise KernelError(f"weight '{self.name}' is negative somewhere ({values.min()!r})")
        if values.max() > self.bound * (1.0 + WEIGHT_TOL):
            raise KernelError(f"weight '{self.name}' exceeds its bound M={self.bound!r}")
        total, _ = integrate.quad(lambda y: float(self.density(np.array(y))), 0.0, 1.0,
                                  epsabs=QUAD_TOL, epsrel=QUAD_TOL)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise KernelError(f"weight '{self.name}' integrates to {total!r}, expected 1")

    def mass(self, lower: float, upper: float) -> float:
        """∫_lower^upper f, lower ≤ upper inside [0, 1]."""
        if upper <= lower:
            return 0.0
        if self.antiderivative is not None:
            return float(self.antiderivative(upper) - self.antiderivative(lower))
        value, _ = integrate.quad(lambda y: float(self.density(np.array(y))), lower, upper,
                                  epsabs=QUAD_TOL, epsrel=QUAD_TOL)
        return value


class ConvolutionKernel(MarkovKernel):
    """μ_Δ(x) = ∫ χ_Δ(x − y) f(y) dy on the unit interval."""

    domain = KernelDomain.UNIT_INTERVAL
    outcome_kind = SetKind.LINE

    def __init__(self, weight: Optional[KernelWeight] = None):
        self.weight = weight or KernelWeight.default()
        self.label = f"conv({self.weight.name})"

    def _interval_mass(self, lams, a, b):
        # Substituting u = x − y maps Δ∩[x−1, x] onto [max(x−b, 0), min(x−a, 1)].
        lower = np.maximum(lams - b, 0.0)
        upper = np.minimum(lams - a, 1.0)
        return np.array([self.weight.mass(lo, hi) for lo, hi in zip(lower, upper)])


class PointKernel(MarkovKernel):
    """Degenerate kernel μ_Δ(λ) = χ_Δ(λ)."""

    def __init__(self, outcome_kind: SetKind = SetKind.LINE):
        self.outcome_kind = SetKind(outcome_kind)
        self.domain = {
            SetKind.LINE: KernelDomain.LINE,
            SetKind.CIRCLE: KernelDomain.CIRCLE,
            SetKind.NATURALS: KernelDomain.NATURALS,
        }[self.outcome_kind]
        self.label = "point"

    def check_points(self, lams):
        super().check_points(lams)
        if self.domain == KernelDomain.CIRCLE:
            if np.any(lams < 0) or np.any(lams >= 2.0 * math.pi):
                raise KernelError("point kernel: circle values must lie in [0, 2*pi)")

    def _interval_mass(self, lams, a, b):
        return ((lams >= a) & (lams < b)).astype(float)

    def _point_mass(self, lams, p):
        return (np.abs(lams - p) <= ENDPOINT_TOL).astype(float)

    def _nat_mass(self, lams, members):
        return np.isin(lams, np.asarray(members, dtype=float)).astype(float)


class MixtureKernel(MarkovKernel):
    """Convex combination Σ w_i μ_i of kernels sharing their domains."""

    def __init__(self, kernels: Sequence[MarkovKernel], weights: Sequence[float]):
        if not kernels or len(kernels) != len(weights):
            raise KernelError("mixture needs one weight per kernel")
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise KernelError("mixture weights must be nonnegative and sum to 1")
        first = kernels[0]
        for kernel in kernels[1:]:
            if kernel.domain != first.domain or kernel.outcome_kind != first.outcome_kind:
                raise KernelError("mixture components must share their domains")
        self.kernels = list(kernels)
        self.weights = weights
        self.domain = first.domain
        self.outcome_kind = first.outcome_kind
        self.label = "mix(" + ",".join(f"{w!r}*{k.label}" for w, k in zip(weights, kernels)) + ")"

    def evaluate_many(self, lams, delta, clip=True):
        total = np.zeros(np.atleast_1d(np.asarray(lams, dtype=float)).shape)
        for weight, kernel in zip(self.weights, self.kernels):
            total = total + weight * kernel.evaluate_many(lams, delta, clip=False)
        return np.clip(total, 0.0, 1.0) if clip else total

    def check_points(self, lams):
        for kernel in self.kernels:
            kernel.check_points(lams)

    def _interval_mass(self, lams, a, b):
        raise KernelError("mixture kernels evaluate through their components")


def gaussian_kernel(width: float) -> GaussianKernel:
    return GaussianKernel(width)


def binomial_kernel(eps: float) -> BinomialKernel:
    return BinomialKernel(eps)


def convolution_kernel(weight: Optional[KernelWeight] = None) -> ConvolutionKernel:
    return ConvolutionKernel(weight)


def point_kernel(outcome_kind: SetKind = SetKind.LINE) -> PointKernel:
    return PointKernel(outcome_kind)


def mixture_kernel(kernels: Sequence[MarkovKernel], weights: Sequence[float]) -> MixtureKernel:
    return MixtureKernel(kernels, weights)


def continuity_modulus(kernel: MarkovKernel, delta: MeasurableSet, grid: Sequence[float],
                       step: float) -> ModulusResult:
    """Empirical modulus sup |μ_Δ(λ) − μ_Δ(λ')| over grid pairs with |λ − λ'| ≤ step.

    Args:
        kernel: Kernel to probe
        delta: Outcome set
        grid: Sharp values inside the kernel domain
        step: Pair distance bound δ > 0

    Returns:
        ModulusResult: Not applicable for kernels on the naturals

    Raises:
        KernelError: Empty grid or non-positive step
    """
    points = np.sort(np.asarray(grid, dtype=float))
    if points.size == 0:
        raise KernelError("continuity modulus needs a non-empty grid")
    if not step > 0:
        raise KernelError(f"continuity modulus needs a positive step, got {step}")
    if kernel.domain == KernelDomain.NATURALS:
        return ModulusResult(applicable=False)
    values = kernel.evaluate_many(points, delta)
    best, best_ratio, best_pair, checked = 0.0, 0.0, None, 0
    for offset in range(1, points.size):
        gaps = points[offset:] - points[:-offset]
        mask = gaps <= step
        if not mask.any():
            break
        diffs = np.abs(values[offset:] - values[:-offset])[mask]
        gaps = gaps[mask]
        checked += int(mask.sum())
        index = int(np.argmax(diffs))
        if diffs[index] > best:
            left = np.flatnonzero(mask)[index]
            best = float(diffs[index])
            best_pair = (float(points[left]), float(points[left + offset]))
        positive = gaps > 0
        if positive.any():
            best_ratio = max(best_ratio, float(np.max(diffs[positive] / gaps[positive])))
    return ModulusResult(applicable=True, value=best, max_ratio=best_ratio,
                         pair=best_pair, pairs_checked=checked)


def kernel_axiom_report(kernel: MarkovKernel, sample: Sequence[float],
                        partition: Sequence[MeasurableSet]) -> KernelAxiomReport:
    """Normalization, finite additivity and range of a kernel on a partition.

    Args:
        kernel: Kernel under test
        sample: Sharp values λ
        partition: Finite disjoint cover of the outcome domain

    Returns:
        KernelAxiomReport

    Raises:
        KernelError: If the partition overlaps or does not cover the domain
    """
    if not partition:
        raise KernelError("kernel axioms need a non-empty partition")
    overlap = first_overlap(partition)
    if overlap is not None:
        raise KernelError(f"partition cells {overlap[0]} and {overlap[1]} intersect")
    full = full_set(kernel.outcome_kind)
    if union_all(partition, kernel.outcome_kind) != full:
        raise KernelError("partition does not cover the outcome domain")
    lams = np.asarray(sample, dtype=float)
    rows = [kernel.evaluate_many(lams, cell, clip=False) for cell in partition]
    total = np.sum(rows, axis=0)
    normalization = float(np.max(np.abs(total - 1.0)))
    normalization = max(normalization,
                        float(np.max(np.abs(kernel.evaluate_many(lams, full, clip=False) - 1.0))))
    additivity = 0.0
    for j in range(len(partition) - 1):
        joined = union_all(partition[j:j + 2], kernel.outcome_kind)
        combined = kernel.evaluate_many(lams, joined, clip=False)
        additivity = max(additivity, float(np.max(np.abs(combined - rows[j] - rows[j + 1]))))
    stacked = np.asarray(rows)
    violation = max(0.0, float(-stacked.min()), float(stacked.max() - 1.0))
    passed = max(normalization, additivity, violation) <= AXIOM_TOL
    logger.debug(f"Kernel axioms for {kernel.label}: normalization={normalization!r}, "
                 f"additivity={additivity!r}, range={violation!r}")
    return KernelAxiomReport(normalization_error=normalization, additivity_error=additivity,
                             range_violation=violation, passed=passed)

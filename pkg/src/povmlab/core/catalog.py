"""
Catalog of worked observables: the unsharp number observable, phase observables,
bounded and Gaussian unsharp position, and their special-purpose checks.
"""
import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate, linalg

from ..models.kernels import (
    BinomialKernel, ConvolutionKernel, GaussianKernel, KernelError, KernelWeight,
)
from ..models.operators import HermitianOperator, OperatorError, operator_norm
from ..models.povm import POVM, POVMError, Provenance, SpectralMeasure, diagonal_povm, smear
from ..models.sets import CircleSet, MeasurableSet, SetKind, shift_circle
from ..parsers.spec_parser import SpecParseError, split_spec
from ..utils.numeric_utils import TWO_PI, normal_cdf

logger = logging.getLogger(__name__)

OVERLAP_TOL = 1e-12
GRAM_PSD_TOL = 1e-10

OBSERVABLE_DEFAULTS: Dict[str, Dict[str, float]] = {
    "unsharp-number": {"eps": 0.5, "dim": 200},
    "phase-e1": {"s": 0, "t": 1, "g": 0.5, "dim": 64},
    "phase-can": {"dim": 256},
    "bounded-pos": {"grid": 200},
    "gauss-pos": {"l": 1.0, "min": -50.0, "max": 0.0, "grid": 500},
}
INTEGER_PARAMS = ("dim", "grid", "s", "t")
OBSERVABLE_KINDS = {
    "unsharp-number": SetKind.NATURALS,
    "phase-e1": SetKind.CIRCLE,
    "phase-can": SetKind.CIRCLE,
    "bounded-pos": SetKind.LINE,
    "gauss-pos": SetKind.LINE,
}


class CatalogError(Exception):
    """Exception raised for invalid catalog observables and parameters."""
    pass


class OverlapMatrix:
    """Gram matrix g_nm = ⟨ψ_n|ψ_m⟩ of unit vectors, n, m < D."""

    def __init__(self, entries):
        g = np.array(entries, dtype=np.complex128, copy=True)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] == 0:
            raise CatalogError(f"overlap matrix must be square, got shape {g.shape}")
        if np.max(np.abs(g - g.conj().T)) > OVERLAP_TOL:
            raise CatalogError("overlap matrix is not Hermitian")
        if np.max(np.abs(np.diag(g) - 1.0)) > OVERLAP_TOL:
            raise CatalogError("overlap matrix must have unit diagonal")
        if np.max(np.abs(g)) > 1.0 + OVERLAP_TOL:
            raise CatalogError("overlaps of unit vectors are bounded by 1")
        lowest = float(linalg.eigvalsh(g)[0])
        if lowest < -GRAM_PSD_TOL:
            raise CatalogError(f"overlap matrix is not positive semidefinite (eigenvalue {lowest!r})")
        g.setflags(write=False)
        self.entries = g

    @classmethod
    def identity(cls, dim: int) -> "OverlapMatrix":
        return cls(np.eye(dim))

    @classmethod
    def constant(cls, dim: int) -> "OverlapMatrix":
        """All overlaps 1: every ψ_n equal."""
        return cls(np.ones((dim, dim)))

    @classmethod
    def e1(cls, dim: int, s: int = 0, t: int = 1, g: complex = 0.5) -> "OverlapMatrix":
        """Identity except one pair (s, t) with overlap g, |g| < 1."""
        if s == t or not (0 <= s < dim and 0 <= t < dim):
            raise CatalogError(f"need distinct indices below {dim}, got s={s}, t={t}")
        if not abs(g) < 1:
            raise CatalogError(f"overlap must satisfy |g| < 1, got {g}")
        entries = np.eye(dim, dtype=np.complex128)
        entries[s, t] = g
        entries[t, s] = np.conj(g)
        return cls(entries)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> "OverlapMatrix":
        """Gram matrix of random unit vectors in C^rank."""
        rank = rank or dim
        vectors = rng.normal(size=(rank, dim)) + 1j * rng.normal(size=(rank, dim))
        vectors /= np.linalg.norm(vectors, axis=0)
        g = vectors.conj().T @ vectors
        g = 0.5 * (g + g.conj().T)
        np.fill_diagonal(g, 1.0)
        return cls(g)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


class NumberOperator:
    """N = diag(0, 1, ..., D − 1) in the Fock basis."""

    def __init__(self, dim: int):
        if dim < 1:
            raise CatalogError(f"dimension must be positive, got {dim}")
        self.dim = dim

    @property
    def operator(self) -> HermitianOperator:
        return HermitianOperator.from_diagonal(np.arange(self.dim, dtype=float))

    def phase_shift(self, theta: float) -> np.ndarray:
        """Unitary e^{iNθ}."""
        return np.diag(np.exp(1j * theta * np.arange(self.dim)))


class CovarianceResult(BaseModel):
    """Largest deviation ‖e^{iNθ}F(Δ)e^{−iNθ} − F(Δ⊕θ)‖ over tested pairs."""
    max_deviation: float
    worst_theta: Optional[float] = None
    worst_set: Optional[str] = None
    pairs_checked: int = 0


def unsharp_number(eps: float, dim: int) -> POVM:
    """F({n}) = Σ_{m<D} C(m, n) ε^n (1 − ε)^(m − n) |m⟩⟨m| on the naturals.

    Raises:
        CatalogError: If ε ∉ (0, 1) or D < 1
    """
    if dim < 1:
        raise CatalogError(f"dimension must be positive, got {dim}")
    try:
        kernel = BinomialKernel(eps)
    except KernelError as e:
        raise CatalogError(str(e))
    levels = np.arange(dim, dtype=float)

    def entries(delta: MeasurableSet) -> np.ndarray:
        return kernel.evaluate_many(levels, delta)

    return diagonal_povm(SetKind.NATURALS, dim, entries, f"unsharp-number:eps={eps!r},dim={dim}",
                         spectral_measure=SpectralMeasure.number(dim), kernel=kernel)


def _phase_integrals(k: np.ndarray, a: float, b: float) -> np.ndarray:
    """(1/2π)∫_a^b e^{ikx} dx elementwise, exact at k = 0."""
    safe = np.where(k == 0, 1, k)
    off = np.exp(1j * safe * a) * np.expm1(1j * safe * (b - a)) / (2j * math.pi * safe)
    return np.where(k == 0, (b - a) / TWO_PI, off)


def phase_povm(overlap: OverlapMatrix, description: Optional[str] = None) -> POVM:
    """E(Δ)_nm = g_nm (1/2π)∫_Δ e^{i(n−m)x} dx on the circle.

    Points of a set carry no weight.
    """
    dim = overlap.dim
    index = np.arange(dim)
    k = index[:, None] - index[None, :]
    g = overlap.entries

    def evaluator(delta: MeasurableSet) -> np.ndarray:
        total = np.zeros((dim, dim), dtype=np.complex128)
        for a, b in delta.intervals:
            total += _phase_integrals(k, a, b)
        m = g * total
        return 0.5 * (m + m.conj().T)

    return POVM(SetKind.CIRCLE, dim, evaluator, Provenance.EXPLICIT,
                description or f"phase(dim={dim})", overlap=overlap)


def canonical_phase(dim: int) -> POVM:
    """Phase POVM with all overlaps equal to 1."""
    if dim < 2:
        raise CatalogError(f"canonical phase needs dim >= 2, got {dim}")
    return phase_povm(OverlapMatrix.constant(dim), f"phase-can:dim={dim}")


def e1_phase(dim: int, s: int = 0, t: int = 1, g: float = 0.5) -> POVM:
    """Phase POVM from orthonormal ψ_n except one non-orthogonal pair."""
    return phase_povm(OverlapMatrix.e1(dim, s, t, g), f"phase-e1:s={s},t={t},g={g!r},dim={dim}")


def covariance_check(povm: POVM, thetas: Sequence[float], sets: Sequence[CircleSet]) -> CovarianceResult:
    """Max ‖e^{iNθ}F(Δ)e^{−iNθ} − F(Δ⊕θ)‖ over all (θ, Δ) pairs.

    Raises:
        CatalogError: If the POVM is not a phase POVM
    """
    if povm.kind != SetKind.CIRCLE or povm.overlap is None:
        raise CatalogError(f"covariance check needs a phase POVM, got {povm.description}")
    number = NumberOperator(povm.dim)
    worst = CovarianceResult(max_deviation=0.0)
    checked = 0
    for theta in thetas:
        u = number.phase_shift(theta)
        for delta in sets:
            lhs = u @ povm.matrix(delta) @ u.conj().T
            rhs = povm.matrix(shift_circle(delta, theta))
            deviation = operator_norm(HermitianOperator.symmetrized(lhs - rhs))
            checked += 1
            if deviation > worst.max_deviation or worst.worst_set is None:
                worst = CovarianceResult(max_deviation=deviation, worst_theta=float(theta),
                                         worst_set=delta.to_text())
    return worst.model_copy(update={"pairs_checked": checked})


def bounded_unsharp_position(weight: Optional[KernelWeight] = None, grid: int = 200) -> POVM:
    """Q^f(Δ) = Σ_j μ_Δ(x_j)|x_j⟩⟨x_j| on a uniform grid of [0, 1] with the convolution kernel."""
    if grid < 2:
        raise CatalogError(f"grid size must be at least 2, got {grid}")
    points = np.linspace(0.0, 1.0, grid)
    kernel = ConvolutionKernel(weight or KernelWeight.default())
    return smear(SpectralMeasure.diagonal(points, label=f"Q(grid={grid})"), kernel,
                 f"bounded-pos:grid={grid},weight={kernel.weight.name}")


def gaussian_unsharp_position(width: float = 1.0, lower: float = -50.0, upper: float = 0.0,
                              grid: int = 500) -> POVM:
    """Position marginal smeared with a Gaussian of width l on a uniform grid of [lower, upper]."""
    if grid < 2:
        raise CatalogError(f"grid size must be at least 2, got {grid}")
    if not lower < upper:
        raise CatalogError(f"grid needs lower < upper, got [{lower}, {upper}]")
    try:
        kernel = GaussianKernel(width)
    except KernelError as e:
        raise CatalogError(str(e))
    points = np.linspace(lower, upper, grid)
    return smear(SpectralMeasure.diagonal(points, label=f"Q(grid={grid})"), kernel,
                 f"gauss-pos:l={width!r},min={lower!r},max={upper!r},grid={grid}")


def halfline_localization(width: float, a: float, n: int) -> float:
    """⟨ψ_n, Q^f((−∞, a))ψ_n⟩ for ψ_n the normalized indicator of [−n, −n + 1].

    Computed grid-free as ∫_{−n}^{−n+1} Φ((a − x)/l) dx.

    Raises:
        CatalogError: If l ≤ 0 or n < 1
    """
    if not width > 0:
        raise CatalogError(f"width must be positive, got {width}")
    if n < 1:
        raise CatalogError(f"n must be at least 1, got {n}")
    value, _ = integrate.quad(lambda x: float(normal_cdf((a - x) / width)), -n, -n + 1,
                              epsabs=1e-12, epsrel=1e-12)
    return min(max(value, 0.0), 1.0)


class ObservableSpec(BaseModel):
    """Parsed observable spec string."""
    name: str
    params: Dict[str, float] = Field(default_factory=dict)

    @property
    def kind(self) -> SetKind:
        return OBSERVABLE_KINDS[self.name]

    @property
    def size_key(self) -> str:
        """Parameter that sets the truncation size: dim for Fock observables, grid for positions."""
        return "grid" if self.name in ("bounded-pos", "gauss-pos") else "dim"

    @property
    def size(self) -> int:
        return int(self.params[self.size_key])

    def text(self) -> str:
        """Spec string that parses back to this spec."""
        parts = []
        for key, value in self.params.items():
            if key == "uniform":
                parts.append(f"weight={'uniform' if value else 'default'}")
            elif key in INTEGER_PARAMS:
                parts.append(f"{key}={int(value)}")
            else:
                parts.append(f"{key}={value!r}")
        return f"{self.name}:{','.join(parts)}"

    def with_size(self, size: int) -> "ObservableSpec":
        return self.model_copy(update={"params": {**self.params, self.size_key: float(size)}})

    def build(self) -> POVM:
        """Construct the observable.

        Raises:
            CatalogError: If a parameter is out of range
        """
        p = self.params
        logger.debug(f"Building observable {self.text()}")
        try:
            if self.name == "unsharp-number":
                return unsharp_number(p["eps"], int(p["dim"]))
            if self.name == "phase-e1":
                return e1_phase(int(p["dim"]), int(p["s"]), int(p["t"]), p["g"])
            if self.name == "phase-can":
                return canonical_phase(int(p["dim"]))
            if self.name == "bounded-pos":
                weight = KernelWeight.uniform() if p.get("uniform") else KernelWeight.default()
                return bounded_unsharp_position(weight, int(p["grid"]))
            return gaussian_unsharp_position(p["l"], p["min"], p["max"], int(p["grid"]))
        except (KernelError, POVMError, OperatorError) as e:
            raise CatalogError(f"Failed to build {self.name}: {str(e)}")


def parse_observable(text: str) -> ObservableSpec:
    """Parse an observable spec string such as 'unsharp-number:eps=0.5,dim=200'.

    Raises:
        SpecParseError: Unknown observable or unreadable parameters
    """
    term = split_spec(text)
    if term.name not in OBSERVABLE_DEFAULTS:
        raise SpecParseError(f"unknown observable '{term.name}'", text)
    params = dict(OBSERVABLE_DEFAULTS[term.name])
    for key, value in term.params.items():
        if key not in params and not (term.name == "bounded-pos" and key == "weight"):
            raise SpecParseError(f"unknown parameter '{key}' for {term.name}", text)
        if key == "weight":
            if value not in ("default", "uniform"):
                raise SpecParseError(f"unknown weight '{value}'", text)
            params["uniform"] = 1.0 if value == "uniform" else 0.0
            continue
        try:
            params[key] = float(term.number(key))
        except ValueError as e:
            raise SpecParseError(str(e), text)
    return ObservableSpec(name=term.name, params=params)


def build_observable(text: str, size: Optional[int] = None) -> POVM:
    """Build a catalog observable from its spec string, optionally at another dimension/grid size."""
    spec = parse_observable(text)
    if size is not None:
        spec = spec.with_size(size)
    return spec.build()


def observable_builder(text: str) -> Callable[[int], POVM]:
    """Map D ↦ the observable rebuilt at dimension (or grid size) D."""
    spec = parse_observable(text)
    return lambda size: spec.with_size(size).build()

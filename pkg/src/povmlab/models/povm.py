"""
Spectral measures, POVMs and the smearing constructor F(Δ) = Σ_k μ_Δ(λ_k) P_k.
"""
import logging
from enum import Enum
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
from scipy import linalg

from .kernels import KernelError, MarkovKernel
from .operators import Effect, HermitianOperator, OperatorError, Projection, State, operator_norm
from .sets import MeasurableSet, SetKind, full_set

if TYPE_CHECKING:
    from ..core.catalog import OverlapMatrix

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-10
EIGEN_CLUSTER_TOL = 1e-9


class POVMError(Exception):
    """Exception raised for invalid POVMs and failed POVM evaluations."""
    pass


class Provenance(str, Enum):
    """How a POVM was built."""
    SMEARED = "smeared"
    DIAGONAL = "diagonal"
    EXPLICIT = "explicit"


class SpectralMeasure:
    """Discrete PVM {(λ_k, P_k)} stored as a unitary basis and a column labelling.

    Column c of ``basis`` spans part of the range of P_k for k = ``labels[c]``;
    the standard basis is used when ``basis`` is None.
    """

    def __init__(self, points: Sequence[float], labels: Sequence[int],
                 basis: Optional[np.ndarray] = None, label: str = "E"):
        self.points = np.asarray(points, dtype=float)
        self.labels = np.asarray(labels, dtype=int)
        if self.points.ndim != 1 or self.points.size == 0:
            raise POVMError("spectral measure needs at least one point")
        if np.unique(self.points).size != self.points.size:
            raise POVMError("spectral points must be distinct")
        if self.labels.size == 0 or self.labels.min() < 0 or self.labels.max() >= self.points.size:
            raise POVMError("column labels must index the spectral points")
        if np.unique(self.labels).size != self.points.size:
            raise POVMError("every spectral point needs a non-zero projection")
        self.basis = None
        if basis is not None:
            basis = np.asarray(basis, dtype=np.complex128)
            dim = self.labels.size
            if basis.shape != (dim, dim):
                raise POVMError(f"basis must be {dim}x{dim}, got {basis.shape}")
            deviation = float(np.max(np.abs(basis.conj().T @ basis - np.eye(dim))))
            if deviation > UNITARY_TOL:
                raise POVMError(f"basis is not unitary (deviation {deviation!r})")
            self.basis = basis
        self.label = label

    @classmethod
    def diagonal(cls, values: Sequence[float], label: str = "diag") -> "SpectralMeasure":
        """PVM of diag(values) in the standard basis; equal values share a projection."""
        values = np.asarray(values, dtype=float)
        points, labels = np.unique(values, return_inverse=True)
        return cls(points, labels, label=label)

    @classmethod
    def number(cls, dim: int) -> "SpectralMeasure":
        """Number PVM: λ_k = k with P_k = |k⟩⟨k|, k < dim."""
        return cls.diagonal(np.arange(dim, dtype=float), label=f"N(dim={dim})")

    @classmethod
    def from_operator(cls, op: HermitianOperator, tol: float = EIGEN_CLUSTER_TOL) -> "SpectralMeasure":
        """Sharp observable of a Hermitian matrix; eigenvalues within ``tol`` form one atom."""
        values, vectors = linalg.eigh(op.matrix)
        labels = np.zeros(values.size, dtype=int)
        points = [values[0]]
        for i in range(1, values.size):
            if values[i] - points[-1] > tol:
                points.append(values[i])
            labels[i] = len(points) - 1
        return cls(points, labels, basis=vectors, label=f"spec(dim={op.dim})")

    @property
    def dim(self) -> int:
        return self.labels.size

    @property
    def size(self) -> int:
        return self.points.size

    def compose(self, column_weights: np.ndarray) -> np.ndarray:
        """V diag(w) V† for per-column weights w."""
        if self.basis is None:
            return np.diag(column_weights.astype(np.complex128))
        return (self.basis * column_weights) @ self.basis.conj().T

    def projection(self, k: int) -> Projection:
        weights = (self.labels == k).astype(float)
        return Projection(HermitianOperator(self.compose(weights), check=False))

    def weights(self, state: State) -> np.ndarray:
        """⟨ψ, P_k ψ⟩ for every k."""
        if state.dim != self.dim:
            raise POVMError(f"state dimension {state.dim} does not match {self.dim}")
        amplitudes = state.vector if self.basis is None else self.basis.conj().T @ state.vector
        return np.bincount(self.labels, weights=np.abs(amplitudes) ** 2, minlength=self.size)

    def __repr__(self) -> str:
        return f"SpectralMeasure({self.label}, points={self.size}, dim={self.dim})"


class POVM:
    """Domain descriptor plus evaluator Δ ↦ F(Δ).

    Smeared POVMs keep their spectral measure and kernel so outcome sampling can
    run the two-stage randomization.
    """

    def __init__(self, kind: SetKind, dim: int, evaluator: Callable[[MeasurableSet], np.ndarray],
                 provenance: Provenance, description: str,
                 spectral_measure: Optional[SpectralMeasure] = None,
                 kernel: Optional[MarkovKernel] = None, diagonal: bool = False,
                 overlap: Optional["OverlapMatrix"] = None):
        self.kind = SetKind(kind)
        self.dim = int(dim)
        self._evaluator = evaluator
        self.provenance = provenance
        self.description = description
        self.spectral_measure = spectral_measure
        self.kernel = kernel
        self.diagonal = diagonal
        self.overlap = overlap

    @property
    def full_set(self) -> MeasurableSet:
        return full_set(self.kind)

    @property
    def is_smeared(self) -> bool:
        return self.spectral_measure is not None and self.kernel is not None

    def matrix(self, delta: MeasurableSet) -> np.ndarray:
        """Raw matrix of F(Δ).

        Raises:
            POVMError: On a set of the wrong domain or a failed evaluation
        """
        if delta.kind != self.kind:
            raise POVMError(f"{self.description} is defined on {self.kind.value} sets, "
                            f"got a {delta.kind.value} set")
        try:
            m = self._evaluator(delta)
        except (KernelError, OperatorError) as e:
            raise POVMError(f"Failed to evaluate {self.description} on {delta}: {str(e)}")
        if m.shape != (self.dim, self.dim):
            raise POVMError(f"evaluator returned shape {m.shape}, expected {(self.dim, self.dim)}")
        return m

    def operator(self, delta: MeasurableSet) -> HermitianOperator:
        return HermitianOperator(self.matrix(delta), check=not self.diagonal)

    def evaluate(self, delta: MeasurableSet) -> Effect:
        """F(Δ) as a classified effect.

        Raises:
            POVMError: If F(Δ) fails the effect check
        """
        try:
            return Effect(self.operator(delta))
        except OperatorError as e:
            raise POVMError(f"{self.description} on {delta}: {str(e)}")

    def norm(self, delta: MeasurableSet) -> float:
        """‖F(Δ)‖."""
        if self.diagonal:
            return float(np.max(np.abs(np.diag(self.matrix(delta)))))
        return operator_norm(self.operator(delta))

    def __repr__(self) -> str:
        return f"POVM({self.description}, {self.provenance.value}, dim={self.dim})"


def smear(measure: SpectralMeasure, kernel: MarkovKernel, description: Optional[str] = None) -> POVM:
    """Smeared POVM F(Δ) = Σ_k μ_Δ(λ_k) P_k.

    Args:
        measure: Sharp observable E
        kernel: Markov kernel μ whose domain contains every λ_k

    Returns:
        POVM: Commutative POVM in E's eigenbasis

    Raises:
        POVMError: If a spectral point lies outside the kernel domain
    """
    try:
        kernel.check_points(measure.points)
    except KernelError as e:
        raise POVMError(f"Cannot smear {measure.label} with {kernel.label}: {str(e)}")

    def evaluator(delta: MeasurableSet) -> np.ndarray:
        weights = kernel.evaluate_many(measure.points, delta)
        return measure.compose(weights[measure.labels])

    logger.debug(f"Smearing {measure.label} with {kernel.label}")
    return POVM(kernel.outcome_kind, measure.dim, evaluator, Provenance.SMEARED,
                description or f"smear({measure.label}, {kernel.label})",
                spectral_measure=measure, kernel=kernel, diagonal=measure.basis is None)


def diagonal_povm(kind: SetKind, dim: int, entries: Callable[[MeasurableSet], np.ndarray],
                  description: str, **extras) -> POVM:
    """POVM with F(Δ) = diag(entries(Δ))."""
    def evaluator(delta: MeasurableSet) -> np.ndarray:
        return np.diag(np.asarray(entries(delta), dtype=np.complex128))

    return POVM(kind, dim, evaluator, Provenance.DIAGONAL, description, diagonal=True, **extras)

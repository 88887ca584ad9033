"""
Dense complex Hermitian operators at a truncation dimension D.

Operators are immutable: the backing array is copied and marked read-only, and the
eigenvalues are computed once on demand.
"""
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg

from ..utils.numeric_utils import format_float

HERMITIAN_TOL = 1e-12
POSITIVITY_TOL = 1e-10
IDEMPOTENCE_TOL = 1e-10
PROJECTION_EIGEN_TOL = 1e-8
NORMALIZATION_TOL = 1e-12
EXPECTATION_IMAG_TOL = 1e-12


class OperatorError(Exception):
    """Exception raised for invalid operators and failed linear algebra."""
    def __init__(self, message: str, frobenius_norm: Optional[float] = None,
                 max_entry: Optional[float] = None):
        self.message = message
        self.frobenius_norm = frobenius_norm
        self.max_entry = max_entry
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Append the matrix condition report when one is attached."""
        if self.frobenius_norm is not None:
            return (f"{self.message} (Frobenius norm {self.frobenius_norm!r}, "
                    f"max |entry| {self.max_entry!r})")
        return self.message


class OperatorClass(str, Enum):
    """Outcome of ``classify``."""
    PROJECTION = "projection"
    EFFECT = "effect"
    POSITIVE = "positive"
    INDEFINITE = "indefinite"


class HermitianOperator:
    """Immutable D×D complex Hermitian matrix."""

    __slots__ = ("_matrix", "_eigenvalues", "_diagonal")

    def __init__(self, matrix: Any, check: bool = True):
        m = np.array(matrix, dtype=np.complex128, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise OperatorError(f"expected a non-empty square matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise OperatorError("matrix has non-finite entries")
        if check:
            scale = 1.0 + float(np.max(np.abs(m)))
            deviation = float(np.max(np.abs(m - m.conj().T)))
            if deviation > HERMITIAN_TOL * scale:
                raise OperatorError(f"matrix is not Hermitian (deviation {deviation!r})",
                                    *_condition_report(m))
        m.setflags(write=False)
        self._matrix = m
        self._eigenvalues: Optional[np.ndarray] = None
        self._diagonal: Optional[bool] = None

    @classmethod
    def from_diagonal(cls, values: Sequence[float]) -> "HermitianOperator":
        return cls(np.diag(np.asarray(values, dtype=float)), check=False)

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls(np.eye(dim), check=False)

    @classmethod
    def symmetrized(cls, matrix: Any) -> "HermitianOperator":
        """(M + M†)/2 of an arbitrary square matrix."""
        m = np.asarray(matrix, dtype=np.complex128)
        return cls(0.5 * (m + m.conj().T), check=False)

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._matrix

    @property
    def is_diagonal(self) -> bool:
        if self._diagonal is None:
            off = self._matrix - np.diag(np.diag(self._matrix))
            self._diagonal = not np.any(off)
        return self._diagonal

    def eigenvalues(self) -> np.ndarray:
        """Ascending real eigenvalues (cached)."""
        if self._eigenvalues is None:
            if self.is_diagonal:
                values = np.sort(np.real(np.diag(self._matrix)))
            else:
                try:
                    values = linalg.eigvalsh(self._matrix)
                except (linalg.LinAlgError, ValueError) as e:
                    raise OperatorError(f"eigensolver failed: {str(e)}",
                                        *_condition_report(self._matrix))
            values.setflags(write=False)
            self._eigenvalues = values
        return self._eigenvalues

    def norm(self) -> float:
        return operator_norm(self)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_dims(self, other)
        return HermitianOperator(self._matrix + other._matrix, check=False)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_dims(self, other)
        return HermitianOperator(self._matrix - other._matrix, check=False)

    def scaled(self, alpha: float) -> "HermitianOperator":
        """Real multiple alpha·H."""
        return HermitianOperator(float(alpha) * self._matrix, check=False)

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"


class State:
    """Unit vector ψ in C^D."""

    __slots__ = ("_vector",)

    def __init__(self, vector: Any):
        v = np.array(vector, dtype=np.complex128, copy=True).reshape(-1)
        if v.size == 0:
            raise OperatorError("state vector is empty")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORMALIZATION_TOL:
            raise OperatorError(f"state vector is not normalized (norm {norm!r})")
        v.setflags(write=False)
        self._vector = v

    @classmethod
    def normalized(cls, vector: Any) -> "State":
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise OperatorError("cannot normalize the zero vector")
        return cls(v / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "State":
        if not 0 <= index < dim:
            raise OperatorError(f"basis index {index} outside dimension {dim}")
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    @classmethod
    def uniform(cls, dim: int) -> "State":
        return cls.normalized(np.ones(dim))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "State":
        return cls.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))

    @property
    def dim(self) -> int:
        return self._vector.size

    @property
    def vector(self) -> np.ndarray:
        return self._vector


class Effect:
    """Hermitian operator with spectrum in [0, 1] (within the relative positivity tolerance)."""

    def __init__(self, op: HermitianOperator):
        kind, witness = classify(op)
        if kind not in (OperatorClass.EFFECT, OperatorClass.PROJECTION):
            raise OperatorError(f"operator is not an effect ({kind.value}, witness {witness!r})")
        self.op = op
        self.is_projection = kind == OperatorClass.PROJECTION

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    def norm(self) -> float:
        return operator_norm(self.op)


class Projection(Effect):
    """Orthogonal projection: idempotent with eigenvalues in {0, 1}."""

    def __init__(self, op: HermitianOperator):
        super().__init__(op)
        if not self.is_projection:
            raise OperatorError("operator is not a projection")


def _condition_report(m: np.ndarray):
    finite = np.where(np.isfinite(m), m, 0)
    return float(np.linalg.norm(finite)), float(np.max(np.abs(finite)))


def _check_dims(a, b) -> None:
    if a.dim != b.dim:
        raise OperatorError(f"dimension mismatch: {a.dim} and {b.dim}")


def positivity_tolerance(op: HermitianOperator) -> float:
    """tol_pos = 1e-10·(1 + ‖op‖)."""
    return POSITIVITY_TOL * (1.0 + operator_norm(op))


def operator_norm(op: HermitianOperator) -> float:
    """Spectral norm max|λ| from a full Hermitian eigendecomposition.

    Args:
        op: Hermitian operator

    Returns:
        float: Operator norm

    Raises:
        OperatorError: If the eigensolver fails (with a matrix condition report)
    """
    values = op.eigenvalues()
    return float(max(abs(values[0]), abs(values[-1])))


def commutator_norm(a: HermitianOperator, b: HermitianOperator) -> float:
    """‖AB − BA‖ in operator norm.

    The commutator of two Hermitian matrices is skew-Hermitian, so i[A, B] is
    Hermitian and its spectral radius is the norm.

    Raises:
        OperatorError: On dimension mismatch
    """
    _check_dims(a, b)
    if a.is_diagonal and b.is_diagonal:
        return 0.0
    c = a.matrix @ b.matrix - b.matrix @ a.matrix
    return operator_norm(HermitianOperator.symmetrized(1j * c))


def classify(op: HermitianOperator):
    """Classify an operator as projection, effect, positive or indefinite.

    Returns:
        Tuple[OperatorClass, float]: Class and witness (the offending eigenvalue,
        or ‖H² − H‖ for projections)
    """
    values = op.eigenvalues()
    tol = POSITIVITY_TOL * (1.0 + float(max(abs(values[0]), abs(values[-1]))))
    lowest, highest = float(values[0]), float(values[-1])
    if lowest < -tol:
        return OperatorClass.INDEFINITE, lowest
    idempotence = float(np.max(np.abs(values * values - values)))
    near_binary = np.all(np.minimum(np.abs(values), np.abs(values - 1.0)) <= PROJECTION_EIGEN_TOL)
    if idempotence <= IDEMPOTENCE_TOL and near_binary:
        return OperatorClass.PROJECTION, idempotence
    if highest <= 1.0 + tol:
        return OperatorClass.EFFECT, highest
    return OperatorClass.POSITIVE, highest


def expectation(op: HermitianOperator, state: State) -> float:
    """⟨ψ, Hψ⟩, which is real for Hermitian H.

    Raises:
        OperatorError: On dimension mismatch or a non-negligible imaginary part
    """
    _check_dims(op, state)
    psi = state.vector
    value = complex(np.vdot(psi, op.matrix @ psi))
    # Rounding in the imaginary part scales with ‖H‖, not with ⟨H⟩.
    if abs(value.imag) > EXPECTATION_IMAG_TOL * (1.0 + operator_norm(op)):
        raise OperatorError(f"expectation has imaginary part {value.imag!r}")
    return float(value.real)


def top_eigenvector(op: HermitianOperator):
    """Largest eigenvalue and a unit eigenvector for it."""
    values, vectors = linalg.eigh(op.matrix)
    return float(values[-1]), vectors[:, -1]


def matrix_to_payload(op: HermitianOperator) -> Dict[str, Any]:
    """JSON payload: dimension plus row-major [re, im] pairs."""
    entries: List[List[float]] = [[float(z.real), float(z.imag)] for z in op.matrix.reshape(-1)]
    return {"dim": op.dim, "entries": entries}


def matrix_from_payload(payload: Dict[str, Any]) -> HermitianOperator:
    """Inverse of ``matrix_to_payload``.

    Raises:
        OperatorError: If the payload is malformed or not Hermitian
    """
    try:
        dim = int(payload["dim"])
        pairs = payload["entries"]
    except (KeyError, TypeError, ValueError) as e:
        raise OperatorError(f"malformed matrix payload: {str(e)}")
    if len(pairs) != dim * dim:
        raise OperatorError(f"expected {dim * dim} entries, got {len(pairs)}")
    values = np.array([complex(re, im) for re, im in pairs]).reshape(dim, dim)
    return HermitianOperator(values)


def matrix_to_text(op: HermitianOperator) -> str:
    """Text export: the dimension on the first line, then one 're im' pair per line."""
    lines = [str(op.dim)]
    for z in op.matrix.reshape(-1):
        lines.append(f"{format_float(float(z.real))} {format_float(float(z.imag))}")
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> HermitianOperator:
    """Inverse of ``matrix_to_text``."""
    lines = [line.split() for line in text.strip().splitlines() if line.strip()]
    if not lines:
        raise OperatorError("matrix text is empty")
    try:
        dim = int(lines[0][0])
        pairs = [(float(re), float(im)) for re, im in lines[1:]]
    except ValueError as e:
        raise OperatorError(f"malformed matrix text: {str(e)}")
    return matrix_from_payload({"dim": dim, "entries": pairs})

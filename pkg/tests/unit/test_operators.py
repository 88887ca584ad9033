import numpy as np
import pytest

from povmlab.models.operators import (
    Effect, HermitianOperator, OperatorClass, OperatorError, Projection, State,
    classify, commutator_norm, expectation, matrix_from_payload, matrix_from_text, matrix_to_payload,
    matrix_to_text, operator_norm, positivity_tolerance,
)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


class TestHermitianOperator:
    """Tests for the HermitianOperator class."""

    def test_rejects_non_square(self):
        """Test that a non-square matrix is rejected."""
        with pytest.raises(OperatorError):
            HermitianOperator(np.zeros((2, 3)))

    def test_rejects_non_hermitian_with_condition_report(self):
        """Test that a non-Hermitian matrix is rejected with a condition report."""
        with pytest.raises(OperatorError) as excinfo:
            HermitianOperator([[0.0, 1.0], [0.0, 0.0]])

        assert excinfo.value.frobenius_norm == pytest.approx(1.0)
        assert "Frobenius norm" in str(excinfo.value)

    def test_rejects_non_finite(self):
        """Test that NaN entries are rejected."""
        with pytest.raises(OperatorError):
            HermitianOperator([[np.nan, 0.0], [0.0, 1.0]])

    def test_is_immutable(self):
        """Test that the stored matrix is read-only."""
        op = HermitianOperator.identity(2)

        with pytest.raises(ValueError):
            op.matrix[0, 0] = 5.0

    def test_eigenvalues_sorted(self):
        """Test ascending eigenvalues of a diagonal operator."""
        op = HermitianOperator.from_diagonal([3.0, 1.0, 2.0])

        np.testing.assert_allclose(op.eigenvalues(), [1.0, 2.0, 3.0])
        assert op.is_diagonal is True

    def test_norm(self):
        """Test the spectral norm uses absolute values."""
        assert operator_norm(HermitianOperator.from_diagonal([-3.0, 1.0])) == 3.0

    def test_arithmetic(self):
        """Test sums, differences and real multiples."""
        a = HermitianOperator.identity(2)
        b = HermitianOperator(PAULI_Z)

        np.testing.assert_allclose((a + b).matrix, np.diag([2.0, 0.0]))
        np.testing.assert_allclose((a - b).matrix, np.diag([0.0, 2.0]))
        np.testing.assert_allclose(b.scaled(2.0).matrix, 2.0 * PAULI_Z)

    def test_dimension_mismatch(self):
        """Test that operators of different dimensions cannot be added."""
        with pytest.raises(OperatorError):
            HermitianOperator.identity(2) + HermitianOperator.identity(3)

    def test_positivity_tolerance_scales_with_norm(self, random_hermitian):
        """Test the relative positivity tolerance."""
        expected = 1e-10 * (1.0 + operator_norm(random_hermitian))

        assert positivity_tolerance(random_hermitian) == pytest.approx(expected)


class TestCommutator:
    """Tests for commutator norms."""

    def test_pauli_matrices(self):
        """Test ‖XZ − ZX‖ = 2."""
        norm = commutator_norm(HermitianOperator(PAULI_X), HermitianOperator(PAULI_Z))

        assert norm == pytest.approx(2.0)

    def test_diagonal_operators_commute(self):
        """Test that diagonal operators commute exactly."""
        a = HermitianOperator.from_diagonal([1.0, 2.0])
        b = HermitianOperator.from_diagonal([3.0, -1.0])

        assert commutator_norm(a, b) == 0.0

    def test_operator_commutes_with_itself(self, random_hermitian):
        """Test [H, H] = 0 for a dense operator."""
        assert commutator_norm(random_hermitian, random_hermitian) == pytest.approx(0.0, abs=1e-10)


class TestClassify:
    """Tests for operator classification."""

    def test_projection(self, projection_matrix):
        """Test a rank-one projection."""
        kind, _ = classify(HermitianOperator(projection_matrix))

        assert kind == OperatorClass.PROJECTION

    def test_effect(self):
        """Test a proper effect."""
        kind, witness = classify(HermitianOperator.from_diagonal([0.5, 0.25]))

        assert kind == OperatorClass.EFFECT
        assert witness == pytest.approx(0.5)

    def test_positive(self):
        """Test a positive operator above the identity."""
        kind, _ = classify(HermitianOperator.from_diagonal([2.0, 0.0]))

        assert kind == OperatorClass.POSITIVE

    def test_indefinite(self):
        """Test an operator with a negative eigenvalue."""
        kind, witness = classify(HermitianOperator.from_diagonal([-1.0, 0.0]))

        assert kind == OperatorClass.INDEFINITE
        assert witness == -1.0

    def test_effect_wrapper(self, projection_matrix):
        """Test the Effect and Projection wrappers."""
        effect = Effect(HermitianOperator(projection_matrix))

        assert effect.is_projection is True
        assert effect.norm() == pytest.approx(1.0)
        with pytest.raises(OperatorError):
            Effect(HermitianOperator.from_diagonal([2.0, 0.0]))
        with pytest.raises(OperatorError):
            Projection(HermitianOperator.from_diagonal([0.5, 0.5]))


class TestOperatorProperties:
    """Property checks over random operators and states."""

    def test_norm_homogeneity(self, rng):
        """Test ‖cH‖ = |c|·‖H‖."""
        for _ in range(5):
            a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
            op = HermitianOperator.symmetrized(a)
            c = float(rng.normal()) * 3.0

            assert operator_norm(op.scaled(c)) == pytest.approx(abs(c) * operator_norm(op), rel=1e-10)

    def test_norm_triangle_inequality(self, rng):
        """Test ‖A + B‖ ≤ ‖A‖ + ‖B‖."""
        for _ in range(5):
            a = HermitianOperator.symmetrized(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
            b = HermitianOperator.symmetrized(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))

            assert operator_norm(a + b) <= operator_norm(a) + operator_norm(b) + 1e-10

    def test_classify_stable_under_symmetrization(self, projection_matrix, random_hermitian):
        """Test that symmetrizing an already Hermitian matrix keeps its class."""
        operators = [
            HermitianOperator(projection_matrix),
            HermitianOperator.from_diagonal([0.5, 0.25]),
            HermitianOperator.from_diagonal([2.0, 0.0]),
            random_hermitian,
        ]
        for op in operators:
            kind, _ = classify(op)
            again, _ = classify(HermitianOperator.symmetrized(op.matrix))

            assert again == kind

    def test_projection_expectation_in_unit_interval(self, rng):
        """Test 0 ≤ ⟨ψ, Pψ⟩ ≤ 1 for a random projection and random states."""
        basis, _ = np.linalg.qr(rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3)))
        projection = Projection(HermitianOperator.symmetrized(basis @ basis.conj().T))
        for _ in range(20):
            value = expectation(projection.op, State.random(6, rng))

            assert -1e-12 <= value <= 1.0 + 1e-12

    def test_expectation_of_large_operator_near_zero(self, rng):
        """Test that rounding in a large-norm expectation is not mistaken for a complex value."""
        state = State.random(16, rng)
        a = HermitianOperator.symmetrized(rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16)))
        shifted = a - HermitianOperator.identity(16).scaled(expectation(a, state))
        big = shifted.scaled(1e6 / operator_norm(shifted))

        value = expectation(big, state)

        assert operator_norm(big) == pytest.approx(1e6)
        assert abs(value) < 1e-6



class TestState:
    """Tests for the State class."""

    def test_rejects_unnormalized(self):
        """Test that vectors must have unit norm."""
        with pytest.raises(OperatorError):
            State([1.0, 1.0])

    def test_normalized(self):
        """Test normalizing a vector."""
        state = State.normalized([3.0, 4.0])

        np.testing.assert_allclose(np.abs(state.vector), [0.6, 0.8])

    def test_zero_vector(self):
        """Test that the zero vector cannot be normalized."""
        with pytest.raises(OperatorError):
            State.normalized([0.0, 0.0])

    def test_basis_index_checked(self):
        """Test that basis indices must fit the dimension."""
        with pytest.raises(OperatorError):
            State.basis(3, 5)

    def test_uniform(self):
        """Test the uniform superposition."""
        np.testing.assert_allclose(State.uniform(4).vector, 0.5)

    def test_random_is_reproducible(self):
        """Test that random states depend only on the generator."""
        first = State.random(5, np.random.default_rng(1))
        second = State.random(5, np.random.default_rng(1))

        np.testing.assert_array_equal(first.vector, second.vector)

    def test_expectation(self):
        """Test ⟨ψ, Hψ⟩ on a basis vector."""
        value = expectation(HermitianOperator.from_diagonal([1.0, 2.0]), State.basis(2, 1))

        assert value == 2.0

    def test_expectation_dimension_mismatch(self):
        """Test that dimensions must agree."""
        with pytest.raises(OperatorError):
            expectation(HermitianOperator.identity(3), State.basis(2, 0))


class TestMatrixExport:
    """Tests for the matrix text and payload formats."""

    def test_text_export(self, random_hermitian):
        """Test that the text export restores every entry exactly."""
        text = matrix_to_text(random_hermitian)
        restored = matrix_from_text(text)

        assert text.splitlines()[0] == "8"
        assert len(text.splitlines()) == 65
        np.testing.assert_array_equal(restored.matrix, random_hermitian.matrix)

    def test_payload_size_checked(self):
        """Test that a payload with the wrong number of entries is rejected."""
        with pytest.raises(OperatorError):
            matrix_from_payload({"dim": 2, "entries": [[1.0, 0.0]]})

    def test_malformed_text(self):
        """Test that unreadable matrix text is rejected."""
        with pytest.raises(OperatorError):
            matrix_from_text("2\n1 x\n")

    def test_payload_export(self, random_hermitian):
        """Test the JSON payload of a dense operator."""
        payload = matrix_to_payload(random_hermitian)

        assert payload["dim"] == 8
        assert len(payload["entries"]) == 64
        np.testing.assert_array_equal(matrix_from_payload(payload).matrix, random_hermitian.matrix)

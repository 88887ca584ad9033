from typing import List, Optional, Sequence, Tuple

from ..models.sets import MeasurableSet, SetKind, full_set, intersection, union_all


class PartitionValidationError(Exception):
    """Exception raised for partitions that are not finite disjoint covers."""
    def __init__(self, message: str, cell: Optional[int] = None):
        self.message = message
        self.cell = cell
        super().__init__(self._format_message())

    def _format_message(self) -> str:
        """Format the error message with the cell index."""
        if self.cell is not None:
            return f"Cell {self.cell}: {self.message}"
        return self.message


class PartitionValidator:
    """Validator for outcome partitions."""

    def validate_partition(self, cells: Sequence[MeasurableSet],
                           kind: SetKind) -> Tuple[bool, List[PartitionValidationError]]:
        """Check that cells are non-empty, pairwise disjoint and cover the domain.

        Args:
            cells: Partition cells
            kind: Domain the partition must cover

        Returns:
            Tuple[bool, List[PartitionValidationError]]: Validation result and list of errors
        """
        errors = []
        if not cells:
            errors.append(PartitionValidationError("partition has no cells"))
            return False, errors
        for i, cell in enumerate(cells):
            if cell.kind != kind:
                errors.append(PartitionValidationError(
                    f"cell is a {cell.kind.value} set, expected {SetKind(kind).value}", i))
            elif cell.is_empty:
                errors.append(PartitionValidationError("cell is empty", i))
        if errors:
            return False, errors
        for i in range(len(cells)):
            for j in range(i + 1, len(cells)):
                if not intersection(cells[i], cells[j]).is_empty:
                    errors.append(PartitionValidationError(f"cell intersects cell {j}", i))
        if union_all(cells, kind) != full_set(kind):
            errors.append(PartitionValidationError("cells do not cover the domain"))
        return len(errors) == 0, errors

    def require_partition(self, cells: Sequence[MeasurableSet], kind: SetKind) -> None:
        """Raise the first validation error, if any.

        Raises:
            PartitionValidationError: If the partition is invalid
        """
        valid, errors = self.validate_partition(cells, kind)
        if not valid:
            raise errors[0]

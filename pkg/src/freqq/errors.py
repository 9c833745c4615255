"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` (snake_case) and the
process exit status the CLI maps it to: 2 for input/validation problems,
3 for numerical failures.
"""
from __future__ import annotations


class FreqqError(Exception):
    """Base class for all package errors."""

    code = "error"
    exit_status = 2


class InputError(FreqqError):
    """Invalid input data or arguments (CLI exit status 2)."""

    exit_status = 2


class NumericalError(FreqqError):
    """Computation failed on numerically degenerate data (CLI exit status 3)."""

    exit_status = 3


class RowError(InputError):
    """Input error localized to a data row.

    Rows are numbered 1-based over data rows; the header is row 0.
    """

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyInput(InputError):
    code = "empty_input"


class MalformedRow(RowError):
    code = "malformed_row"


class NonUniformSampling(RowError):
    code = "non_uniform_sampling"


class NonFiniteValue(RowError):
    code = "non_finite_value"


class OutOfRange(InputError):
    code = "out_of_range"


class SeriesTooShort(InputError):
    code = "series_too_short"


class LagTooLarge(InputError):
    code = "lag_too_large"


class DegenerateInput(InputError):
    code = "degenerate_input"


class UnknownScenario(InputError):
    code = "unknown_scenario"


class InvalidArgument(InputError):
    code = "invalid_argument"


class VarianceZero(NumericalError):
    code = "variance_zero"


class NumericalBlowup(NumericalError):
    code = "numerical_blowup"


def _registry() -> dict[str, int]:
    reg = {}
    stack = [FreqqError]
    while stack:
        cls = stack.pop()
        reg[cls.code] = cls.exit_status
        stack.extend(cls.__subclasses__())
    return reg


def exit_status_for(code: str) -> int:
    """Process exit status for a diagnostic code; unknown codes map to 2."""
    return _registry().get(code, 2)

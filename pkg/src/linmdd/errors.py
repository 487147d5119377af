"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Related data blocks disagree on their shared dimension."""


class NonFiniteData(ValueError):
    """An input array contains NaN or infinite entries."""


class RankDeficient(ValueError):
    """A regression design is singular beyond the rank tolerance."""


class UnsupportedResponseDim(ValueError):
    """A test requested for a response dimension it does not support."""


class InvalidPlan(ValueError):
    """A permutation plan with no replicates (or other unusable settings)."""


class ConsistencyError(ArithmeticError):
    """A nonnegative statistic came out negative beyond round-off tolerance.

    This indicates a kernel bug or pathological input, not a statistical
    outcome, so it is raised instead of being clamped away.
    """


class MissingColumn(ValueError):
    """A declared column is absent from an input file."""


class MissingValue(ValueError):
    """An input file cell is empty where a value is required."""


class NonNumericCell(ValueError):
    """An input file cell could not be parsed as a number."""


class InputFormatError(ValueError):
    """A delimiter-separated input file is malformed (ragged rows, bad numbers)."""

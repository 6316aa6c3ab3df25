"""
Error Types
===========

Exception hierarchy for the era-splitting GBDT toolkit.
Every error carries the exit code the CLI reports for it:

- 1: usage / configuration problems
- 2: data problems (bad CSV, bad model file, shape mismatch)
- 3: internal assertion failures
"""

from typing import Optional


class EraGBDTError(Exception):
    """Base class for all toolkit errors"""
    exit_code = 3


class ConfigError(EraGBDTError, ValueError):
    """Invalid training configuration or settings value"""
    exit_code = 1

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class DataError(EraGBDTError, ValueError):
    """Problem with input data or a persisted artifact"""
    exit_code = 2


class MissingColumnError(DataError):
    def __init__(self, column: str, path: str = ""):
        self.column = column
        where = f" in {path}" if path else ""
        super().__init__(f"Missing required column '{column}'{where}")


class DataParseError(DataError):
    """Non-numeric or non-finite cell, reported with its location"""

    def __init__(self, row: int, column: str, value: object, reason: str = "not a finite number"):
        self.row = row
        self.column = column
        super().__init__(f"Row {row}, column '{column}': {value!r} is {reason}")


class EmptyDatasetError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class ModelFormatError(DataError):
    """Malformed model file"""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        prefix = f"{location}: " if location else ""
        super().__init__(f"{prefix}{message}")


class ModelVersionError(ModelFormatError):
    def __init__(self, found: object, expected: int):
        self.found = found
        super().__init__(f"unsupported format_version {found!r} (expected {expected})", "format_version")


class UndefinedScoreError(EraGBDTError, ArithmeticError):
    """Partition score with an empty partition and no L2 term"""


class UndefinedCorrelationError(DataError):
    """Pearson correlation of a constant (or too short) vector"""

    def __init__(self, message: str, era: Optional[int] = None):
        self.era = era
        if era is not None:
            message = f"era {era}: {message}"
        super().__init__(message)

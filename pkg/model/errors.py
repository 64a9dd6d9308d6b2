"""
Exception hierarchy for the quality assessment engine.

Every error carries the process exit code the command line front end uses
when it surfaces the failure.
"""

from typing import Any, Dict, List, Optional


class IQAError(Exception):
    """Base class for all engine errors."""

    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'success': False,
            'error': str(self),
            'type': type(self).__name__,
        }


# I/O errors (exit code 2)

class IOFailure(IQAError):
    exit_code = 2


class ImageNotFoundError(IOFailure):
    pass


class UnsupportedFormatError(IOFailure):
    pass


class DumpFormatError(IOFailure):
    pass


class ManifestParseError(IOFailure):
    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MissingFilesError(IOFailure):
    def __init__(self, missing: List[str]):
        self.missing = list(missing)
        listing = ", ".join(self.missing)
        super().__init__(f"{len(self.missing)} file(s) not found: {listing}")


# Dimension errors (exit code 3)

class DimensionError(IQAError):
    exit_code = 3


class ImageTooSmallError(DimensionError):
    pass


class PlaneTooSmallError(DimensionError):
    pass


class DimensionMismatchError(DimensionError):
    pass


class InconsistentDimensionsError(DimensionError):
    pass


class LayoutMismatchError(DimensionError):
    pass


# Configuration errors (exit code 4)

class ConfigError(IQAError):
    exit_code = 4


# Data errors (exit code 5)

class DegenerateInputError(IQAError):
    exit_code = 5


class DegenerateLuminanceError(IQAError):
    exit_code = 5

    def __init__(self, levels: List[int]):
        self.levels = list(levels)
        super().__init__(f"luminance standard deviation below floor at levels {self.levels}")

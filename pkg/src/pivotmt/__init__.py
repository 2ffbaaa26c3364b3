"""Pivot-language statistical machine translation toolkit."""

from .errors import AlignmentError, ConfigError, DataError, PivotMtError

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "ConfigError",
    "DataError",
    "PivotMtError",
    "__version__",
]

"""Toolkit exception hierarchy.

The CLI turns any of these into a one-line diagnostic and a nonzero exit;
plain OSError is left to propagate from file operations and handled the
same way at the top level.
"""


class PivotMtError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(PivotMtError):
    """Invalid configuration value, unknown key, or bad argument combination."""


class DataError(PivotMtError):
    """Malformed or inconsistent data (corpora, tables, score inputs)."""


class AlignmentError(DataError):
    """Line-aligned inputs disagree, e.g. parallel files of different length."""

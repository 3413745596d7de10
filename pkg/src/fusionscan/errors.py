"""Exception hierarchy shared across the package."""

from __future__ import annotations


class FusionScanError(Exception):
    """Base class for all errors raised by fusionscan."""


class MalformedInputError(FusionScanError, ValueError):
    """Input data (permutations, tables, files) is not well formed."""


class SizeCapError(FusionScanError):
    """A closure or enumeration grew beyond its configured cap."""


class InconsistencyError(FusionScanError):
    """A presentation or extension description is not consistent."""


class UsageError(FusionScanError, ValueError):
    """Unknown family name, bad parameters or similar caller mistakes."""


class DomainError(FusionScanError, ValueError):
    """An operation was applied outside its mathematical domain."""


class ResourceError(FusionScanError):
    """A search exceeded its node / enumeration budget."""

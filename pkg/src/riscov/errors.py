"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli.EXIT_CODES).
"""


class RiscovError(Exception):
    """Base class for all package errors."""


class ConfigError(RiscovError):
    """Scenario config file could not be parsed."""


class InvariantError(RiscovError):
    """A scenario / geometry / sweep invariant is violated."""


class GeometryError(InvariantError):
    """Degenerate geometry, e.g. sensor at or below the UE antenna height."""


class NumericInstabilityError(RiscovError):
    """A numeric sanity check failed (e.g. imaginary residue too large)."""


class CapExceededError(RiscovError):
    """A hard size cap was exceeded (e.g. subset enumeration beyond N=20)."""

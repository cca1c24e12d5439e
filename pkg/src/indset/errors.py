"""Exception types shared across the package.

Each class maps onto one CLI exit code, so callers can tell bad input from a
size refusal from a genuine bug.
"""


class IndsetError(Exception):
    """Base class for all package errors."""

    exit_code = 4


class InputError(IndsetError, ValueError):
    """Malformed or out-of-contract input."""

    exit_code = 2


class SizeCapError(IndsetError):
    """The instance exceeds a configured size cap."""

    exit_code = 3


class RepairError(InputError):
    """A set handed to a completion step violates its precondition."""


class InvariantError(IndsetError, AssertionError):
    """An internal invariant failed. Always a bug."""

    exit_code = 4

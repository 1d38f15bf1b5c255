"""Exception types shared across the package.

The CLI maps these onto exit codes: config problems exit with 2,
contract violations with 3.
"""


class BattError(Exception):
    """Base class for all package errors."""


class ConfigError(BattError):
    """A configuration file or config value is invalid.

    The message always names the offending field (dotted path).
    """


class ContractViolation(BattError):
    """An operation was called outside its stated preconditions."""


class InfeasibleGridError(ContractViolation):
    """No arm on the grid meets the required success threshold."""

"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: config problems exit 2,
data problems exit 3, numerical divergence exits 4.
"""


class HopgdError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(HopgdError):
    """Invalid or inconsistent configuration (unknown key, bad value)."""

    exit_code = 2


class DataError(HopgdError):
    """Invalid input data: malformed bundle, missing artifact, bad shapes."""

    exit_code = 3


class StaleCacheError(DataError):
    """A cached artifact no longer matches the inputs it was derived from."""


class DivergenceError(HopgdError):
    """Training produced a non-finite loss or parameter."""

    exit_code = 4

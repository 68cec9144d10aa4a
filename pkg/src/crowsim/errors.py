"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit 1,
numerical failures exit 2, I/O problems (plain OSError) exit 3.
"""


class ConfigurationError(ValueError):
    """Invalid parameters, grid, or run configuration."""


class NumericalError(RuntimeError):
    """A computation failed a convergence or sanity check."""

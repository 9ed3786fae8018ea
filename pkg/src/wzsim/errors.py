"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific one that applies.
"""


class ValidationError(ValueError):
    """Bad user input: grid parameters, particle rosters, configs."""


class ResourceLimitError(RuntimeError):
    """A requested computation would exceed the built-in size guards."""


class NormDriftError(RuntimeError):
    """State norm drifted past the abort threshold during evolution."""

"""Exception types shared across the package.

The CLI maps these onto exit codes: validation and usage problems
exit 2, numerical non-convergence exits 3, I/O failures exit 4.
"""


class ShapeError(ValueError):
    """A vector or parameter block does not conform to the model."""


class ConfigurationError(ValueError):
    """Inconsistent configuration (e.g. covariate law present without kappa)."""


class CapacityError(ValueError):
    """Request exceeds the exact-enumeration limit."""


class UndefinedScaleError(ValueError):
    """Ratio-scale effect undefined (zero or unit baseline probability)."""


class SchemaError(ValueError):
    """Input file is missing required columns or malformed."""


class EmptyDatasetError(ValueError):
    """No qualifying rows after filtering."""


class DegenerateDataError(ValueError):
    """A node's outcome takes only one value, so its conditional cannot be fit."""


class FitConvergenceError(RuntimeError):
    """An optimizer failed to reach its convergence criterion."""


class BootstrapFailureError(RuntimeError):
    """Too many bootstrap replicates failed to converge."""


class SeparationWarning(UserWarning):
    """Perfect separation capped a coefficient at the documented bound."""


class DegenerateNodeWarning(UserWarning):
    """A node was excluded from structure learning (single-class outcome)."""

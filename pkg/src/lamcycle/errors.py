"""Exception types shared across the package."""


class RangeError(ValueError):
    """Input outside the supported range, or a value that cannot be materialized."""


class FactorizationError(RuntimeError):
    """Factoring gave up within its budget; the input is beyond desk feasibility."""

class ResourceLimitError(MemoryError):
    """A request would exceed the configured memory budget."""


class ExactCutoffError(ValueError):
    """k is above the exact big-integer cutoff; use the log-space path."""


class NotPrimeError(ValueError):
    pass


class NotFoundError(LookupError):
    """No admissible n up to the scan bound. Raise the bound and retry."""


class ToleranceUnreachableError(ArithmeticError):
    pass

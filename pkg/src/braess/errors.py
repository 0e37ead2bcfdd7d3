"""Exception hierarchy shared by every module."""


class BraessError(Exception):
    """Base class for all library errors."""


class DomainError(BraessError, ValueError):
    """A numeric argument lies outside its allowed range."""


class FeasibilityError(BraessError, ValueError):
    """A flow does not route exactly the instance's rate over simple s-t paths."""


class StructureError(BraessError, ValueError):
    """The network is malformed (no s-t path, self-loop, duplicate id, ...)."""


class CapacityError(BraessError):
    """An enumeration would exceed its configured bound."""

    def __init__(self, what: str, limit: int, count: int | None = None):
        self.what = what
        self.limit = limit
        self.count = count
        msg = f"{what} exceeds the configured bound of {limit}"
        if count is not None:
            msg += f" (count {count})"
        super().__init__(msg)


class UnsupportedModelError(BraessError):
    """The operation is not defined for the latency functions present."""


class InfeasibleError(BraessError):
    """A search found no admissible solution."""


class SearchFailure(BraessError):
    """Randomized search exhausted its attempt budget."""

    def __init__(self, message: str, best_deviation=None):
        self.best_deviation = best_deviation
        super().__init__(message)

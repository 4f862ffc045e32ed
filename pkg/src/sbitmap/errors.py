"""Exception types shared across the package."""


class Error(Exception):
    """Base class for all sbitmap errors."""


class InvalidInput(Error, ValueError):
    """An argument is outside the domain an operation supports."""


class NoSolution(Error):
    """The requested accuracy cannot be met with the given memory budget.

    Carries ``min_feasible_m``, the smallest bit budget for which a
    solution exists at the requested capacity.
    """

    def __init__(self, message: str, min_feasible_m: int):
        super().__init__(message)
        self.min_feasible_m = min_feasible_m


class Saturated(Error):
    """A sketch has exhausted its state and can no longer estimate."""


class ResourceLimit(Error):
    """An exact computation would exceed its configured work budget."""

"""Exception hierarchy shared by every arw_fixation module."""

from typing import Any, Iterable, Optional, Tuple


class ARWError(Exception):
    """Base exception for the toolkit."""

    def __init__(self, message: str):
        self.message = message
        super().__init__(self.message)


class InvalidParamsError(ARWError):
    """Raised when (n, mu, lambda) violate their invariants."""


class IllegalToppleError(ARWError):
    """Raised when a site without an active particle is toppled (a policy bug)."""

    def __init__(self, site: int, message: Optional[str] = None):
        self.site = site
        super().__init__(message or f"Illegal topple at site {site}: no active particle")


class BudgetExhaustedError(ARWError):
    """Raised by restricted runs when the instruction budget is reached."""

    def __init__(self, consumed: int, state: Any = None, message: Optional[str] = None):
        self.consumed = consumed
        self.state = state
        super().__init__(message or f"Instruction budget exhausted after {consumed} instructions")


class InvalidMaskError(ARWError):
    """Raised when a masked (site, index) pair is not a Sleep in the raw stack."""

    def __init__(self, pairs: Iterable[Tuple[int, int]]):
        self.pairs = sorted(pairs)
        super().__init__(f"Mask may only null Sleep draws; offending pairs: {self.pairs[:10]}")


class LayoutTooCoarseError(ARWError):
    """Raised when floor(c0 ln n) < 2 or the cycle cannot hold two intervals."""


class OutOfWindowError(ARWError):
    """Raised when a start site lies outside the two-interval window of a source."""


class TrapCollisionError(ARWError):
    """Raised when a particle is not alone at its designated trap."""

    def __init__(self, site: int, sleep_index: int, message: Optional[str] = None):
        self.site = site
        self.sleep_index = sleep_index
        super().__init__(
            message or f"Trap at site {site} (instruction {sleep_index}) is not solitary"
        )


class OddCycleError(ARWError):
    """Raised when the stabilization loop is asked to run on an odd cycle."""


class StateSpaceTooLargeError(ARWError):
    """Raised when the exact oracle would enumerate more states than allowed."""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"State space exceeds {limit} states")


class NoAbsorptionError(ARWError):
    """Raised when more particles than sites make absorption impossible."""


class RegimeWarning(UserWarning):
    """Emitted when a report is asked for parameters outside its regime."""

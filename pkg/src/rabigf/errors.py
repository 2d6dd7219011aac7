"""Exception hierarchy shared by every solver module."""


class RabiError(Exception):
    """Base class for all errors raised by rabigf."""


class CouplingOutOfRange(RabiError, ValueError):
    """Coupling at or beyond the critical value (or negative)."""


class InvalidSector(RabiError, ValueError):
    """Bargmann index / parity not allowed for the model family."""


class DeltaZero(RabiError, ValueError):
    """The G-function formalism degenerates at zero qubit splitting."""


class PoleProximity(RabiError, ValueError):
    """Evaluation requested inside the guard band of a pole at integer x."""

    def __init__(self, n, x, guard):
        self.n = n
        self.x = x
        self.guard = guard
        super().__init__(f"x={x!r} lies within {guard:g} of the pole at x={n}")


class NoConvergence(RabiError, ArithmeticError):
    """Series tail criterion not met before the hard term cap."""


class GridResolutionExceeded(RabiError, ArithmeticError):
    """Sign pattern on the scan grid stayed inconsistent after refinement."""

    def __init__(self, message, interval=None):
        self.interval = interval
        super().__init__(message)


class NoSolution(RabiError, ValueError):
    """Closed-form condition has no real solution."""


class LiftingFailed(RabiError, ArithmeticError):
    """A claimed exceptional point does not show a lifted pole."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)

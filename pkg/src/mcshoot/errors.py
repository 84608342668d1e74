"""Exception hierarchy shared by the solver modules."""


class McShootError(Exception):
    """Base class for all solver failures."""


class DomainError(McShootError, ValueError):
    """A function was evaluated outside its domain or returned a non-finite value."""


class NotSatisfied(McShootError):
    """A structural hypothesis could not be verified (e.g. no root of the (f_ap) equation)."""


class StepSizeUnderflow(McShootError):
    """The adaptive step controller stalled."""

    def __init__(self, x, h):
        super().__init__(f"step size underflow at x={x!r} (h={h!r})")
        self.x = x
        self.h = h


class BracketFailure(McShootError):
    """A monotone root bracket could not be established."""


class NotReached(McShootError):
    """The near-equilibrium probe never produced the required rotation."""


class ScanFailure(McShootError):
    """No shooting value with rotation below one half-turn was found."""


class MissingSolution(McShootError):
    """No rotation bracket for the requested (j, side) pair."""

    def __init__(self, j, side, detail=""):
        msg = f"no solution bracket for j={j}, side={side}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.j = j
        self.side = side


class FamilyLost(McShootError):
    """Too many consecutive ladder rungs failed."""


class NoConvergence(McShootError):
    """Successive ladder rungs disagree beyond the limit tolerance."""


class NotClosed(McShootError):
    """An orbit did not return to its Poincare section."""


class EmptyLevel(McShootError):
    """No admissible point on the requested energy level."""

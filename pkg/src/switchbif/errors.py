"""Exception hierarchy shared by all switchbif modules.

Errors fall into three families that the CLI maps onto exit codes:
configuration problems (ParseError, ValidationError -> 1), numerical
failures (the integrator and solver errors -> 2), and everything
else (-> 3).
"""


class SwitchBifError(Exception):
    """Base class for all errors raised by this package."""


# -- configuration / model construction ------------------------------------

class ParseError(SwitchBifError):
    """A configuration document could not be parsed.

    Carries a human-readable location (JSON path or line/column) in
    ``location`` when one is available.
    """

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


class ValidationError(SwitchBifError):
    """A system definition violates the standing assumptions.

    ``report`` holds the full ValidationReport when the error was
    produced from one.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# -- domain / argument errors -----------------------------------------------

class DomainError(SwitchBifError):
    """A parameter value lies outside the system's parameter interval."""


class OriginError(SwitchBifError):
    """The origin was passed where the switching law is undefined."""


class SideError(SwitchBifError):
    """A section-map entry point lies on the wrong semi-axis."""


# -- integration failures ----------------------------------------------------

class TangencyError(SwitchBifError):
    """A switching-manifold crossing is not transversal.

    Raised when the normal velocity at a located crossing is too small,
    or when the fields on both sides of an axis disagree about the
    crossing direction (sliding / grazing contact).
    """


class BudgetError(SwitchBifError):
    """The switching-event budget (max_arcs) was exhausted."""


class StiffnessError(SwitchBifError):
    """The adaptive step size underflowed."""


class EscapeError(SwitchBifError):
    """The trajectory left the configured bounding box."""


# -- solver / estimator failures ----------------------------------------------

class NoConvergenceError(SwitchBifError):
    """An iterative estimate failed to settle.

    ``sequence`` records the estimates produced so far.
    """

    def __init__(self, message, sequence=None):
        super().__init__(message)
        self.sequence = list(sequence) if sequence is not None else []


class NoBracketError(SwitchBifError):
    """No sign change was found over the supplied bracket."""


class DegenerateError(SwitchBifError):
    """A nondegeneracy hypothesis fails (e.g. vanishing derivative)."""


class NoOrbitError(SwitchBifError):
    """No periodic-orbit residual sign change exists in the scan range."""


class PerturbationTooSmallError(SwitchBifError):
    """Return-map residuals sit below the integrator noise floor."""


class InsufficientDataError(SwitchBifError):
    """Too few data points for the requested fit."""

"""Exception types shared across the package."""


class FrontTrackError(Exception):
    """Base class for all package errors."""


class OutOfDomain(FrontTrackError):
    """A state left the admissible box."""


class NonHyperbolic(FrontTrackError):
    """Complex or numerically coincident characteristic speeds."""


class ClassificationError(FrontTrackError):
    """A characteristic field violates its declared nonlinearity class."""


class NewtonDiverged(FrontTrackError):
    """A damped Newton solve failed to reach its residual target."""


class InverseDiverged(NewtonDiverged):
    """Flux inversion failed to converge."""


class CurveLeftDomain(OutOfDomain):
    """A wave curve left the admissible box."""


class AssumptionViolation(FrontTrackError):
    """Standing assumptions failed validation before a run."""

    def __init__(self, report):
        self.report = report
        super().__init__("assumption validation failed:\n" + str(report))


class EventCapExceeded(FrontTrackError):
    """The event loop exceeded its hard cap or stalled below the time floor."""


class DomainEscape(FrontTrackError):
    """A simulation state left the admissible box mid-run."""


class CFLViolation(FrontTrackError):
    """Requested CFL number above the stability limit."""


class LeftDomain(FrontTrackError):
    """A characteristic trace left the computed space-time region."""


class ScenarioParseError(FrontTrackError):
    """Malformed scenario file; carries a line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

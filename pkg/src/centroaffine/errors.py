"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: input/format problems exit 2,
numeric/stability problems exit 3, matching failures exit 4.
"""


class CentroAffineError(Exception):
    """Base class for all library errors."""


# --- input / format / validation -------------------------------------------

class InvariantViolation(CentroAffineError):
    """A domain object violates one of its structural invariants."""


class ParseError(CentroAffineError):
    def __init__(self, message, line=None, field=None):
        loc = ""
        if line is not None:
            loc += f" (line {line}"
            loc += f", field {field!r})" if field is not None else ")"
        elif field is not None:
            loc += f" (field {field!r})"
        super().__init__(message + loc)
        self.line = line
        self.field = field


class TooFewPoints(CentroAffineError):
    pass


class NoContour(CentroAffineError):
    pass


class EmptyOverlap(CentroAffineError):
    """Two signals have no usable common x-range after trimming."""


class ZeroVariance(CentroAffineError):
    pass


class DegenerateArea(CentroAffineError):
    pass


class DegenerateInit(CentroAffineError):
    pass


class DegenerateConfiguration(CentroAffineError):
    """Point correspondences too degenerate for homography estimation."""


class PointAtInfinity(CentroAffineError):
    pass


class SingularFit(CentroAffineError):
    pass


class BandInfeasible(CentroAffineError):
    pass


class Unclassified(CentroAffineError):
    """Constant-curvature classification is not available for this input."""


class WrongOrientation(CentroAffineError):
    """Jet orientation sign is negative; caller must flip the curve."""


class MatchingFailure(CentroAffineError):
    pass


# --- numeric / stability -----------------------------------------------------

class IrregularPoint(CentroAffineError):
    """A sample fails the regularity test (a defining bracket is ~ zero)."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (sample {index})"
        super().__init__(message)
        self.index = index


class TooFewRegularPoints(CentroAffineError):
    pass


class StabilityViolation(CentroAffineError):
    pass


class ShockEncountered(CentroAffineError):
    def __init__(self, message, time=None):
        if time is not None:
            message = f"{message} (t = {time:.6g})"
        super().__init__(message)
        self.time = time


class PastShock(CentroAffineError):
    def __init__(self, message, shock_time=None):
        if shock_time is not None:
            message = f"{message} (shock time {shock_time:.6g})"
        super().__init__(message)
        self.shock_time = shock_time


class KappaVanishes(CentroAffineError):
    pass


class RangeExceeded(CentroAffineError):
    pass

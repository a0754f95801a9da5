"""Exception types shared across the package."""


class FlatFlowError(Exception):
    """Base class for all package errors."""


class EmptyOrFullSet(FlatFlowError):
    """Operation requires a set with a nonempty boundary."""


class SpecMismatch(FlatFlowError):
    """Two fields live on different grids."""


class NonTorusDomain(FlatFlowError):
    """Operation is defined on the periodic torus only."""


class AreaMismatch(FlatFlowError):
    """Area constraint between two sets violated beyond tolerance."""


class GuardViolation(FlatFlowError):
    """A set touches the guard margin of a boxed planar domain."""


class NoConvergence(FlatFlowError):
    """Iteration budget exhausted before reaching tolerance."""


class TooFewVertices(FlatFlowError):
    """Contour has too few vertices for the requested operation."""


class NonSimpleContour(FlatFlowError):
    """Contour is not a simple closed positively oriented loop."""


class InsufficientWindow(FlatFlowError):
    """Not enough samples inside the decay-fit window."""


class ParseError(FlatFlowError):
    """Config text is malformed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKey(ParseError):
    """Config contains a key the schema does not define."""


class ConstraintViolation(FlatFlowError):
    """Config values are individually valid but jointly inconsistent."""


class IoError(FlatFlowError):
    """File could not be read or written."""


class StepFailed(FlatFlowError):
    """A flow step failed; carries the step index and the original error."""

    def __init__(self, step, original):
        self.step = step
        self.original = original
        super().__init__(f"step {step}: {original}")

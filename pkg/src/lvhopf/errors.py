"""Exception hierarchy for lvhopf."""


class LVHopfError(Exception):
    """Base class for all package errors."""


class InfeasibleParams(LVHopfError):
    """No interior (all-positive) equilibrium exists for the given parameters."""


class PoleReached(LVHopfError):
    """A kernel transform was evaluated exactly at its pole."""


class DiracNotDiscretizable(LVHopfError):
    """A point-mass kernel cannot be turned into quadrature weights."""


class NoPositiveRoot(LVHopfError):
    pass


class BracketNotFound(LVHopfError):
    pass


class SingularSystem(LVHopfError):
    pass


class BoundaryRoot(LVHopfError):
    """A root sits on (or numerically at) a counting contour."""


class ConvergenceFailure(LVHopfError):
    pass


class NoCrossingFound(LVHopfError):
    """The scan in E reached its ceiling without a stability change."""

    def __init__(self, message, E_max):
        super().__init__(message)
        self.E_max = E_max


class DegenerateRoot(LVHopfError):
    pass


class NotErlang(LVHopfError):
    pass


class BlowUp(LVHopfError):
    """A simulation left the admissible region (non-finite, huge or non-positive state).

    The trajectory computed up to the failure is attached as ``partial``.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class StepTooCoarse(LVHopfError):
    pass


class TooShort(LVHopfError):
    pass


class ConfigError(LVHopfError):
    pass

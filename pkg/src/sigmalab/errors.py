"""Exception hierarchy shared by all sigmalab modules."""


class SigmaLabError(Exception):
    """Base class for every error raised by sigmalab."""


class ChartSingularity(SigmaLabError):
    """A point sits on the projection pole of the requested chart."""


class InvalidCoordinate(SigmaLabError):
    """A stereographic coordinate is not finite."""


class MarkedPointCollision(SigmaLabError):
    """Two marked points snapped to the same mesh vertex."""


class DegenerateTriangle(SigmaLabError):
    """A mesh triangle has (numerically) zero area."""


class BasingViolation(SigmaLabError):
    """A field fails the condition f(p_i) = q_i at some marked vertex."""


class ShapeMismatch(SigmaLabError):
    """Field and mesh sizes disagree."""


class DivergentEnergy(SigmaLabError):
    """A radial profile has infinite sigma-model energy."""


class Unresolved(SigmaLabError):
    """The lattice degree is too far from an integer to be trusted."""


class UnderResolved(Unresolved):
    """A sampled map needs a finer mesh; carries a refinement hint."""

    def __init__(self, message, hint=None):
        super().__init__(message)
        self.hint = hint


class EpsilonTooLarge(SigmaLabError, ValueError):
    """Shrinking-family parameter outside (0, 1/2)."""


class IndeterminateValue(SigmaLabError):
    """A rational map evaluates to 0/0."""


class NoLump(SigmaLabError):
    """Lump width requested for a zero-energy field."""


class LineSearchFailure(SigmaLabError):
    """Backtracking exhausted without decreasing the energy."""


class IncomparableFields(SigmaLabError):
    """Fields live on different meshes or carry different basing data."""


class NotSimplyConnected(SigmaLabError):
    """Sector classification requested for a target with nontrivial pi_1."""


class ExperimentFailure(SigmaLabError):
    """An experiment's asserted bound did not hold."""

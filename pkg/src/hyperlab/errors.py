"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map it to a status
without a lookup table: 1 for invalid input, 2 for numerical failure.
"""


class HyperlabError(Exception):
    exit_code = 2

    def __init__(self, message, *, stage=None, witness=None):
        super().__init__(message)
        self.stage = stage
        self.witness = witness


class ValidationError(HyperlabError):
    exit_code = 1


class NumericalError(HyperlabError):
    exit_code = 2


class SpecError(ValidationError):
    """A domain or map spec file failed to parse or validate."""


class OutsideDisk(ValidationError):
    pass


class OutsideBall(ValidationError):
    pass


class InvalidDilatation(ValidationError):
    pass


class NotOnBoundary(ValidationError):
    pass


class DegenerateGradient(ValidationError):
    pass


class NoCrossing(ValidationError):
    """Ray left the bounding ball without crossing the boundary."""


class StrongConvexityFailed(ValidationError):
    pass


class InsufficientSamples(ValidationError):
    pass


class DilatationExceedsK(ValidationError):
    pass


class NotSelfMap(ValidationError):
    pass


class InjectivitySuspect(ValidationError):
    pass


class NonFinite(NumericalError):
    pass


class UndefinedDerivative(NumericalError):
    pass


class SingularHolomorphicPart(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass


class InverseInconsistent(NumericalError):
    pass


class NoFeasibleDisc(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class BracketInverted(NumericalError):
    pass


class ReproFailure(HyperlabError):
    """A repro-suite stage assertion did not hold."""

    exit_code = 3

"""Exception hierarchy.

Three families, matching the CLI exit-code contract: bad input data (exit 2),
negative verdicts from a check that ran to completion (exit 1), and numerical
failures such as ill-conditioning or boundary proximity (exit 3).
"""


class LkqError(Exception):
    """Base class for all library errors."""


class InputError(LkqError):
    """Invalid input data (CLI exit code 2)."""


class VerdictFailure(LkqError):
    """A verification ran and the verdict is negative (CLI exit code 1).

    Carries the full report object when one exists.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericalError(LkqError):
    """Numerical failure: singularity, conditioning, boundary (exit code 3)."""


# --- input errors ---------------------------------------------------------

class RedundantFacet(InputError):
    pass


class Unbounded(InputError):
    pass


class Degenerate(InputError):
    pass


class GroupingMismatch(InputError):
    pass


class NotCuboid(InputError):
    pass


class NonIntegral(InputError):
    pass


class RankDeficient(InputError):
    pass


class NotPositivePair(InputError):
    pass


class DegenerateRoots(InputError):
    pass


class PositivityFailure(InputError):
    pass


class NonpositiveWeight(InputError):
    pass


class DegenerateSampleSet(InputError):
    pass


# --- verdict failures -----------------------------------------------------

class ContainmentFailure(VerdictFailure):
    pass


class CoverageFailure(VerdictFailure):
    pass


class ConditionFailure(VerdictFailure):
    pass


class NonConstantScalar(VerdictFailure):
    pass


class IdentityFailure(VerdictFailure):
    pass


class SignFailure(VerdictFailure):
    pass


# --- numerical failures ---------------------------------------------------

class SingularSystem(NumericalError):
    pass


class Inconsistent(NumericalError):
    pass


class BoundaryProximity(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class SingularRestriction(NumericalError):
    pass


class CharacteristicHyperplane(NumericalError):
    pass


class SelfCheckFailure(NumericalError):
    """Two independent computational paths disagree; signals a bug."""

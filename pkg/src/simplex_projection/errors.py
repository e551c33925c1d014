"""Exception classes raised across the package.

Every error derives from :class:`SimplexError` (itself a ``ValueError``), so
callers can catch the whole family at once. The CLI maps the three
intermediate groups onto exit codes.
"""


class SimplexError(ValueError):
    pass


class ValidationError(SimplexError):
    """Input does not describe a valid object (exit code 2 in the CLI)."""


class MatchingError(SimplexError):
    """Unlabeled projections could not be matched (exit code 3 in the CLI)."""


# geometry
class NonPositiveComponent(ValidationError):
    pass


class SumOutOfTolerance(ValidationError):
    pass


class DimensionTooSmall(ValidationError):
    pass


class EmptyIndexSet(ValidationError):
    pass


class IndexAbsent(ValidationError):
    pass


class IndexOutOfRange(ValidationError):
    pass


class UnsupportedDimensionForRendering(ValidationError):
    pass


# projection
class IncompatibleBundle(ValidationError):
    pass


class IncompatiblePair(ValidationError):
    pass


class SameFacet(ValidationError):
    pass


class SingularSystem(ValidationError):
    pass


# set matching
class MixedDimensions(ValidationError):
    pass


class NoFeasibleAssignment(MatchingError):
    pass


class AmbiguousAssignment(MatchingError):
    def __init__(self, message, residual_sums=()):
        super().__init__(message)
        self.residual_sums = tuple(residual_sums)


class PostMatchIncompatibility(MatchingError):
    pass


# density
class DimensionMismatch(ValidationError):
    pass


class DepthOutOfRange(ValidationError):
    pass


class AccuracyTooLow(ValidationError):
    pass


class EvalFailure(SimplexError):
    pass


class OutsideFacet(ValidationError):
    pass


class FacetTooSmall(ValidationError):
    pass


# render / cli
class InconsistentSpec(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class RowValidationError(ValidationError):
    def __init__(self, message, row=None, reason=None):
        super().__init__(message)
        self.row = row
        self.reason = reason

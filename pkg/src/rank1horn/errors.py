"""Exception hierarchy shared across the package."""


class Rank1HornError(Exception):
    """Base class for all errors raised by rank1horn."""


class SpectrumError(Rank1HornError, ValueError):
    """Invalid fixed spectrum."""


class DuplicateEigenvalue(SpectrumError):
    pass


class OrderViolation(SpectrumError):
    pass


class NonPositiveMultiplicity(SpectrumError):
    pass


class UnsupportedCase(Rank1HornError, ValueError):
    pass


class NonPositiveParameter(Rank1HornError, ValueError):
    pass


class NumericalError(Rank1HornError, ArithmeticError):
    """Base class for failures of a numerical routine (CLI exit code 3)."""


class ConvergenceFailure(NumericalError):
    pass


class DegenerateWeight(NumericalError):
    pass


class SupportViolation(NumericalError):
    """Roots do not interlace the fixed spectrum, or the inverse map is ill-posed."""


class NonRealResidue(NumericalError):
    pass


class EigensolverFailure(NumericalError):
    pass


class NearConfluent(NumericalError):
    pass


class TolUnreached(NumericalError):
    pass


class EmptySample(Rank1HornError, ValueError):
    pass

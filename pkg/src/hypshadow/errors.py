"""Exception types raised across the package.

Every error derives from ``HypShadowError`` so the CLI can map them to exit
codes: ``ConfigError`` subclasses exit with 2, everything else with 3.
"""


class HypShadowError(Exception):
    """Base class."""


class ConfigError(HypShadowError):
    pass


class NumericalError(HypShadowError):
    pass


# mapmodel
class NoPreimageRule(NumericalError):
    pass


class AmbiguousBranch(NumericalError):
    pass


class WindowMismatch(NumericalError):
    pass


# cocycle
class SingularFactor(NumericalError):
    pass


class NonConvergence(NumericalError):
    pass


class SingularUnstable(NumericalError):
    pass


class DivergentSeries(NumericalError):
    pass


class IllConditioned(NumericalError):
    pass


class EmptyBlock(NumericalError):
    pass


# shadow
class InvalidConstants(NumericalError):
    pass


class OffsetTooLarge(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class SingularUnstableBlock(NumericalError):
    pass


class EpsilonTooLarge(NumericalError):
    pass


class ChartDomainExceeded(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass


# horseshoe
class InsufficientSamples(NumericalError):
    pass


class EmptyReturnClass(NumericalError):
    pass


class AlphabetTooSmall(NumericalError):
    pass


class RepeatedSymbol(NumericalError):
    pass


# census
class DegenerateCount(NumericalError):
    pass


class NeutralMultiplier(NumericalError):
    pass

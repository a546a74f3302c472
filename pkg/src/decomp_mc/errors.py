"""Exception hierarchy. Every error raised by the package derives from DecompMCError."""


class DecompMCError(ValueError):
    pass


# chain construction / functionals
class NotStochastic(DecompMCError):
    pass


class NotIrreducible(DecompMCError):
    pass


class NotReversible(DecompMCError):
    pass


class LengthMismatch(DecompMCError):
    pass


class AllZeroFunction(DecompMCError):
    pass


# spectral
class EigenFailure(DecompMCError):
    pass


class OptimizerStall(DecompMCError):
    pass


class StateTooHeavy(DecompMCError):
    pass


class NotMixedWithin(DecompMCError):
    pass


# decomposition
class InvalidPartition(DecompMCError):
    pass


class ProjectionNotIrreducible(InvalidPartition):
    pass


class RestrictionNotIrreducible(InvalidPartition):
    pass


class UndefinedHat(DecompMCError):
    pass


class PrecisionLoss(DecompMCError):
    pass


# bounds
class Cor3NonzeroGamma(DecompMCError):
    pass


class DegenerateHalf(DecompMCError):
    pass


# zoo
class NegativeLoop(DecompMCError):
    pass


class Disconnected(DecompMCError):
    pass


class TooManyBases(DecompMCError):
    pass


class NoFractionalMatching(DecompMCError):
    pass

"""Exception and warning types raised across the package."""


class SSRCError(ValueError):
    """Base class for every input or construction error in ssrcphase."""


class NonHermitianInput(SSRCError):
    pass


class OutOfRange(SSRCError):
    pass


class InvalidAngularMomenta(SSRCError):
    pass


class OverflowRisk(SSRCError):
    pass


class NormalizationError(SSRCError):
    pass


class DimensionMismatch(SSRCError):
    pass


class ConventionCheckFailed(SSRCError):
    """Neither kernel convention satisfied the Stratonovich-Weyl checks.

    This points at a bug in the kernel construction, not at bad input.
    """


class TruncationUnsafe(SSRCError):
    pass


class EvenDimension(SSRCError):
    pass


class NonUnitaryTransform(SSRCError):
    pass


class HWRelationViolated(SSRCError):
    pass


class NonIsometric(SSRCError):
    pass


class EvenCodeDimension(SSRCError):
    pass


class AlphaTooLarge(SSRCError):
    pass


class OutsideCVRegime(SSRCError):
    pass


class OddNRequiresCare(UserWarning):
    """Emitted when N is odd, so that the qudit dimension N+1 is even."""

"""Exception hierarchy for dichannel.

Every error raised on purpose by the package derives from
:class:`DIChannelError`, so callers can catch the whole family at once.
Value-like errors also subclass :class:`ValueError` to stay compatible with
code that validates inputs the usual numpy/sklearn way.
"""


class DIChannelError(Exception):
    """Base class for all package errors."""


class ZeroEndpointTap(DIChannelError, ValueError):
    """First or last impulse-response tap is zero."""


class SpectralNull(DIChannelError, ValueError):
    """Frequency response vanishes (within tolerance) on the check grid."""


class PeakPowerViolation(DIChannelError, ValueError):
    """A codeword coordinate exceeds the peak amplitude."""


class NonPositiveSpectrum(DIChannelError, ValueError):
    """Covariance has a non-positive eigenvalue."""


class DimensionMismatch(DIChannelError, ValueError):
    pass


class ZeroVector(DIChannelError, ValueError):
    pass


class RadiusTooLarge(DIChannelError, ValueError):
    """Packing radius leaves no room for two grid points per axis."""


class TooManyCodewords(DIChannelError, ValueError):
    """Exact pairwise scan requested above the supported size."""


class IndexOutOfRange(DIChannelError, IndexError):
    pass


class SameIndex(DIChannelError, ValueError):
    """Type-II estimation requires two distinct messages."""


class InadmissibleRegion(DIChannelError, ValueError):
    """(kappa, mu) outside the open region where the capacity bounds hold."""


class ConfigParse(DIChannelError, ValueError):
    pass


class IoFailure(DIChannelError, OSError):
    pass


class UnknownSuite(DIChannelError, KeyError):
    pass

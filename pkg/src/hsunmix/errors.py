"""Exception types raised by the unmixing toolkit.

Everything derives from UnmixError so callers (and the CLI) can catch one
base class.  IO-related errors additionally derive from UnmixIOError.
"""


class UnmixError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(UnmixError):
    """Operand shapes do not conform."""


class InvalidValue(UnmixError):
    """A value violates a domain invariant (negative, non-finite, out of range)."""


class InvalidRank(UnmixError):
    """Requested endmember count is not representable for the given data."""


class DegenerateData(UnmixError):
    """Input data carries no signal (e.g. all-zero observation matrix)."""


class NotDescentDirection(UnmixError):
    """Line search called with a non-negative directional derivative."""


class ZeroRow(UnmixError):
    """Row normalization hit an all-zero row."""


class ZeroVector(UnmixError):
    """Angle metrics need vectors with positive norm."""


class RankMismatch(UnmixError):
    """True and estimated endmember sets have different sizes."""


class UnmappedLabel(UnmixError):
    """A ground-truth label has no signature assigned."""


class UnknownSignature(UnmixError):
    """A signature name is missing from the spectral library."""


class IndivisibleDims(UnmixError):
    """Raster dimensions are not divisible by the downsampling factor."""


class EmptyBlock(UnmixError):
    """A downsampling block contains only unlabeled pixels."""


class UnmixIOError(UnmixError):
    """Base class for file format errors."""


class ParseError(UnmixIOError):
    """Malformed file content."""


class NonMonotoneWavelengths(UnmixIOError):
    """Wavelength column is not strictly increasing."""


class NegativeReflectance(UnmixIOError):
    """Library reflectance below the -0.01 calibration tolerance."""


class NegativeLabel(UnmixIOError):
    """Ground-truth label below zero."""


class HeaderMismatch(UnmixIOError):
    """Raster payload does not match its header."""

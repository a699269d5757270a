"""
Exception hierarchy shared by every protocol and analysis service.
"""


class PruwError(Exception):
    """Base class for all errors raised by the simulator."""

    pass


# Configuration


class ConfigError(PruwError):
    """Invalid parameters, constants or run configuration."""

    pass


class InadmissibleN(ConfigError):
    """Database count does not satisfy the case's solvability rule."""

    pass


class InvalidParams(ConfigError):
    """Scheme parameters violate a divisibility or range invariant."""

    pass


class InvalidB(ConfigError):
    """Segment count does not divide the subpacket count."""

    pass


class InvalidCase(ConfigError):
    """Scheme case outside 1..4, or not valid for the requested operation."""

    pass


class FieldConfigError(ConfigError):
    """Modulus or evaluation constants violate the field invariants."""

    pass


# Field arithmetic


class FieldError(PruwError):
    """Base class for finite-field arithmetic failures."""

    pass


class ZeroInverse(FieldError):
    """Inverse of the zero element was requested."""

    pass


class SingularSystem(FieldError):
    """A decode system has no unique solution."""

    pass


# Protocol


class ProtocolError(PruwError):
    """Malformed message or state during a read or write."""

    pass


class DimensionMismatch(ProtocolError):
    """Matrix or vector sizes are inconsistent with the scheme parameters."""

    pass


class IndexOutOfRange(ProtocolError):
    """Segment or subpacket index outside its valid range."""

    pass


class DuplicateIndex(ProtocolError):
    """Two update tuples of one upload share a permuted index."""

    pass


class MalformedTranscript(ProtocolError):
    """Round transcript counts are inconsistent with its messages."""

    pass


# Analysis


class AnalysisError(PruwError):
    """Base class for leakage and cost analysis failures."""

    pass


class InfeasibleEnumeration(AnalysisError):
    """Brute-force enumeration exceeds the configured bound."""

    pass


class VerificationMismatch(PruwError):
    """Decoded model or measured costs disagree with the oracle."""

    pass


class SnapshotError(PruwError):
    """Snapshot bytes are truncated, corrupt or of an unknown version."""

    pass

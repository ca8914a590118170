"""
Exception hierarchy shared by every module of the package.

All numerical failures derive from `NumericsError` so that callers (the CLI in
particular) can map them onto a single exit status.  Configuration and regime
problems have their own branches.
"""

from __future__ import annotations

__all__ = [
    "WignerLDPError",
    "NumericsError",
    "NonConvergent",
    "DivergentIntegrand",
    "InvalidBracket",
    "NonStableTail",
    "BracketGrowthFailed",
    "NoConvergence",
    "DegenerateWeights",
    "InvalidParameters",
    "OutOfDomain",
    "TiltOutOfRange",
    "WrongRegime",
]


class WignerLDPError(Exception):
    """Base class for every error raised by the package."""


class NumericsError(WignerLDPError):
    """A numerical routine could not deliver a result at the requested accuracy."""


class NonConvergent(NumericsError):
    """Adaptive refinement exceeded its depth or iteration budget."""


class DivergentIntegrand(NumericsError):
    """A whole-line integrand failed its tail-decay check."""


class InvalidBracket(NumericsError):
    """The end points of a root bracket have function values of the same sign."""


class NonStableTail(NumericsError):
    """A limit extrapolated along a growing sequence did not stabilize."""


class BracketGrowthFailed(NumericsError):
    """Geometric growth of a search bracket never produced the sought sign change."""


class NoConvergence(NumericsError):
    """An eigenvalue iteration exceeded its iteration cap."""


class DegenerateWeights(NumericsError):
    """Importance weights collapsed onto too few samples."""


class InvalidParameters(WignerLDPError, ValueError):
    """Constructor or configuration parameters violate a stated constraint."""


class OutOfDomain(WignerLDPError, ValueError):
    """A function was evaluated outside its domain of definition."""


class TiltOutOfRange(WignerLDPError, ValueError):
    """An exponential tilt has no finite normalizer for the requested law."""


class WrongRegime(WignerLDPError):
    """An optimizer was called for a law outside the regime it handles."""

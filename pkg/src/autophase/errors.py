"""Exception and warning types raised by the simulation kernels."""


class AutophaseError(Exception):
    """Base class for domain errors."""


class OutOfRange(AutophaseError, ValueError):
    """A wavelength or frequency lies outside a model's validity window."""


class ModeCutoff(AutophaseError):
    """The requested slab mode is not guided at this wavelength."""


class DegenerateMismatch(AutophaseError):
    """The unpoled phase mismatch vanishes, so no poling period exists."""


class DegenerateKernel(AutophaseError):
    """A joint spectral amplitude is identically zero on its grid."""


class ZeroVariance(AutophaseError):
    """A marginal distribution collapsed to a single grid point."""


class AliasRisk(AutophaseError):
    """A delay is too large for the frequency grid to sample its fringes."""


class AliasRiskWarning(UserWarning):
    """The spectral kernel does not decay at the grid edge."""


class FlatFringeWarning(UserWarning):
    """Neither scan direction shows fourth-order modulation."""


class VisibilityClampWarning(UserWarning):
    """A scaled visibility above one was clamped."""

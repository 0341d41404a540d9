"""Error taxonomy shared across the package."""


class K3HeightsError(Exception):
    """Base class for all package-specific errors."""


class InputError(K3HeightsError):
    """Malformed user input (JSON, CLI arguments, point/surface data)."""


class NotIsometry(K3HeightsError):
    """Matrix does not preserve the intersection form exactly."""


class NonParabolicInput(K3HeightsError):
    """Operation requires a translation-type parabolic isometry."""


class NoIntegralFixedNullVector(K3HeightsError):
    """Parabolic spectral profile but no usable integral fixed null vector."""


class DegenerateFiber(K3HeightsError):
    """All three fiber coefficients vanish: the involution is undefined there.

    Carries the axis (0, 1 or 2) and the base coordinates that produced the
    degenerate quadratic.  Runs hitting this abort; inputs are never perturbed.
    """

    def __init__(self, axis, base):
        self.axis = axis
        self.base = base
        super().__init__(f"degenerate fiber for involution {axis + 1} over {base}")


class NonConvergence(K3HeightsError):
    """A limit computation failed to reach the requested tolerance."""


class VerificationFailure(K3HeightsError):
    """A verify suite invariant failed (CLI exit code 3)."""

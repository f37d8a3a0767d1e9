"""Exception hierarchy shared across the package.

``VwwError`` is the common base; ``ConfigError`` marks bad user input
(CLI exit code 2) while the numerical subclasses map to exit code 3.
"""


class VwwError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(VwwError):
    """Invalid configuration, schema violation or unusable parameters."""


class GridMismatch(VwwError):
    """Two objects that must share a grid do not."""


class UnresolvedMollifier(VwwError):
    """Grid too coarse to resolve the mollifier support."""


class DegenerateNet(VwwError):
    """A regularized net contains a zero norm; no finite log-log fit exists."""


class NonPositiveLambda(VwwError):
    """Phase integration requested for lambda <= 0."""


class StepFailure(VwwError):
    """Adaptive integrator could not meet the tolerance."""


class BracketFailure(VwwError):
    """No sign change found for an eigenvalue bracket."""

    def __init__(self, n, lo, hi, message=None):
        self.n = n
        self.bracket = (lo, hi)
        super().__init__(
            message
            or f"no sign change for mode n={n} in bracket [{lo:.6g}, {hi:.6g}]"
        )


class NonPositiveSpectrum(VwwError):
    """An operation requiring lambda_n > 0 met a non-positive eigenvalue."""


class TimeGridTooCoarse(VwwError):
    """Forcing time grid cannot resolve the fastest retained mode."""


class CFLViolation(VwwError):
    """Explicit time step exceeds the stability limit."""


class AtomEvaluation(VwwError):
    """Second spatial derivative requested at a Dirac atom location."""


class MissingNorm(VwwError):
    """An estimate needs a norm the given problem cannot furnish."""


class NotBoundedPotential(VwwError):
    """Operation requires a bounded potential but atoms are present."""

"""Exception types shared across the toolkit."""


class AffheatError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(AffheatError):
    """Invalid run configuration (bad key, bad value, schema violation)."""


class NonDominant(AffheatError):
    """A lattice point required to be dominant has a negative coordinate."""


class SingularPoint(AffheatError):
    """A c-function denominator vanishes at the requested spectral point."""


class ExtractionFailed(AffheatError):
    """Exponential-polynomial coefficients did not round to integer counts."""


class ExceptionalCaseUnsupported(AffheatError):
    """Plancherel inversion requested outside the standard parameter range."""


class ResolutionCapExceeded(AffheatError):
    """Grid validation kept failing up to the maximum allowed resolution."""


class DegenerateDirection(AffheatError):
    """Walk exponents do not affinely span, so log kappa has a flat direction."""


class OutsideHull(AffheatError):
    """Drift vector is not interior to the exponent hull (with margin)."""


class NewtonDiverged(AffheatError):
    """Saddle-point solve failed to converge after damping retries."""


class OutsideRegime(AffheatError):
    """Asymptotic formula evaluated outside its validity region."""


class PrecisionLoss(AffheatError):
    """Quadrature error estimate exceeds the requested relative tolerance."""


class RoundingFailed(AffheatError):
    """Structure-constant recovery left a non-integer residual; escalate grid."""


class TableIncomplete(AffheatError):
    """Structure table does not cover the requested support."""


class EmptyRegion(AffheatError):
    """Critical region contains no lattice points at this n (informational)."""


class TailBoundFailed(AffheatError):
    """Certified tail bound for a truncated series could not be established."""


class OutOfStrip(AffheatError):
    """Spectral parameter lies outside the admissible real strip."""

"""Exception and warning types used across the package."""


class QuditPhaseError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitian(QuditPhaseError):
    """Input matrix is not Hermitian within tolerance."""


class NoConvergence(QuditPhaseError):
    """Eigensolver exceeded its sweep budget."""


class SingularMatrix(QuditPhaseError):
    """|det A| is below the singularity threshold; the unitary polar factor
    is not unique.  The positive factor is still available as ``.q``."""

    def __init__(self, message, q=None):
        super().__init__(message)
        self.q = q


class UnsupportedDimension(QuditPhaseError):
    """Requested dimension outside the supported range 2..8."""


class BasisInconsistent(QuditPhaseError):
    """Generator basis violates its orthonormality/reality contracts."""


class NotUnitary(QuditPhaseError):
    """Input matrix is not unitary within tolerance."""


class DimensionMismatch(QuditPhaseError):
    """Operands have different qudit dimensions."""


class BadExponent(QuditPhaseError):
    """Invariant exponent p outside 1..d."""


class BadSpectrum(QuditPhaseError):
    """Schmidt spectrum entries must be nonnegative and sum to one."""


class UnreachableConcurrence(QuditPhaseError):
    """Requested concurrence outside [0, C_max(d)]."""


class BadConcurrence(QuditPhaseError):
    """Scenario concurrence value outside its valid range."""


class InadmissibleConcurrence(QuditPhaseError):
    """Concurrence outside the range where the distinguished-direction
    squared positive factor stays positive semidefinite."""


class SingularState(QuditPhaseError):
    """|det alpha| = 0 within tolerance; the sector split is undefined.
    The determinant magnitude and positive factor are still attached."""

    def __init__(self, message, det_magnitude=None, q=None):
        super().__init__(message)
        self.det_magnitude = det_magnitude
        self.q = q


class OrthogonalState(QuditPhaseError):
    """Overlap with the initial state vanishes; the phase is undefined at
    this sample."""


class GridTooCoarse(QuditPhaseError):
    """Time grid does not meet the odd, >= 101 sample contract."""


class BadAngleRange(QuditPhaseError):
    """Euler angle schedule violates its domain."""


class OpenPath(QuditPhaseError):
    """Frame path endpoints do not close."""


class NotQuantized(QuditPhaseError):
    """d * delta_phi is not within tolerance of a multiple of 2*pi."""


class UndersampledTrace(QuditPhaseError):
    """A smooth segment of a phase trace steps by more than pi/2."""


class PropertyViolation(QuditPhaseError):
    """A numerically checked model property failed (CLI exit code 2)."""


class NonCyclicZeta(UserWarning):
    """zeta does not satisfy the cyclic endpoint condition (== 2*pi mod 3*pi)."""

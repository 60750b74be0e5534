"""Exception types shared across the package."""


class CRFloquetError(Exception):
    """Base class for all package-specific failures."""


class ModelFormatError(CRFloquetError):
    """An atom-model or field file violates the expected schema or an invariant."""


class DimensionCapError(CRFloquetError):
    """A requested Floquet basis exceeds the configured dimension cap."""


class EigensolverError(CRFloquetError):
    """Dense eigendecomposition failed or did not meet its contracts."""


class ExceptionalPointError(EigensolverError):
    """A c-norm collapsed below tolerance: self-orthogonal eigenvector pair.

    Carries the offending eigenvalues in ``eigenvalues``.
    """

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = tuple(eigenvalues)


class SingularShiftError(CRFloquetError):
    """(E - QHQ) is singular or near-singular at the requested energy.

    ``nearest_eigenvalue`` holds an estimate of the closest Q-space eigenvalue.
    """

    def __init__(self, message, nearest_eigenvalue=None):
        super().__init__(message)
        self.nearest_eigenvalue = nearest_eigenvalue


class OffResonanceError(CRFloquetError):
    """A quantity defined only at the dressed resonance was requested away from it."""


class ResonanceBoundaryError(CRFloquetError):
    """The resonance search maximised on the grid boundary; widen the grid."""


class StepSizeError(CRFloquetError):
    """The propagator's step-doubling error estimate exceeded its tolerance."""


class ScanPartialFailure(CRFloquetError):
    """Some scan nodes failed; ``failures`` lists (i, j, message) triples."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = tuple(failures)

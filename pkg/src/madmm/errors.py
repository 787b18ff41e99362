"""Exception hierarchy shared by all madmm modules."""


class MadmmError(Exception):
    """Base class for all madmm errors."""


class DimensionMismatch(MadmmError):
    """Operand shapes are inconsistent."""


class SingularMatrix(MadmmError):
    """A pivot underflowed the singularity threshold during elimination."""


class NoConvergence(MadmmError):
    """An iterative kernel exhausted its iteration budget."""


class NonSymmetric(MadmmError):
    """A matrix required to be symmetric is not."""


class NonpositiveDiagonal(MadmmError):
    """A diagonal entry required to be positive is not."""


class ParseError(MadmmError):
    """A problem document is malformed or violates a value-level invariant."""


class InvalidPenalty(MadmmError):
    """The penalty parameter beta is not strictly positive."""


class SingularBlockGram(MadmmError):
    """Some block Gram matrix A_i^T A_i is numerically singular."""


class InvalidParameter(MadmmError):
    """Solver parameters violate their admissible ranges."""


class Diverged(MadmmError):
    """The primal residual exceeded the divergence guard.

    Carries the partial solver state in ``state`` so callers can still
    inspect or dump the history accumulated before the blow-up.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NotAffine(MadmmError):
    """A probed state transformer is not an affine map."""


class MappingViolation(MadmmError):
    """An eigenvalue pair broke the theorem/remark mapping.

    ``pair`` holds the offending (eigenvalue, mapped value) tuple.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class TooManyBlocks(MadmmError):
    """A permutation-enumeration helper was given more than 8 blocks."""


class SingularG(MadmmError):
    """The KKT primal block G is not invertible."""


class UnknownExperiment(MadmmError):
    """The requested reproduction experiment name is not recognized."""

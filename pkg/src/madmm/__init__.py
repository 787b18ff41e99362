"""Multi-block ADMM solvers with a spectral-analysis toolkit.

Four variants of the alternating direction method of multipliers for
problems  min sum_i theta_i(x_i)  s.t.  sum_i A_i x_i = b:

* ``cyclic``  - direct extension, fixed block order (may diverge, m >= 3)
* ``rp``      - fresh uniformly random block order every sweep
* ``gadmm``   - cyclic prediction plus Gaussian back-substitution correction
* ``sadmm``   - symmetric (forward/backward) sweep plus Richardson dual step

plus analytic and probed iteration matrices, spectral radii, and the
eigenvalue-mapping checks that certify linear convergence.
"""

from .errors import (
    Diverged,
    DimensionMismatch,
    InvalidParameter,
    InvalidPenalty,
    MadmmError,
    MappingViolation,
    NoConvergence,
    NonpositiveDiagonal,
    NonSymmetric,
    NotAffine,
    ParseError,
    SingularBlockGram,
    SingularG,
    SingularMatrix,
    TooManyBlocks,
    UnknownExperiment,
)
from .linalg import SgsSplit, eigenvalues, sgs_split, solve_linear
from .problem import (
    Block,
    MultiBlockProblem,
    Quadratic,
    QuadraticL1,
    SolverState,
    Zero,
    dump_problem,
    load_problem,
    make_problem,
    objective_value,
    primal_residual,
)
from .solvers import (
    SolverParams,
    SplitMix64,
    random_permutation,
    run,
    step_cyclic,
    step_gadmm,
    step_permuted,
    step_rp,
    step_sadmm,
)
from .spectral import (
    KktSystem,
    SpectralReport,
    build_kkt,
    extract_iteration_matrix,
    kkt_solve,
    make_stepper,
    rp_expected_matrix,
    rp_mapping_check,
    sadmm_iteration_matrix,
    schur_complement,
    spectral_radius,
    theorem_map_check,
)
from .subproblem import (
    BlockSubproblem,
    assemble,
    certificate_gap,
    solve_quadratic,
    solve_quadratic_l1,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

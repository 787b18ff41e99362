"""Built-in benchmark problems used by the repro command and the tests."""

import numpy as np

from .problem import MultiBlockProblem, Quadratic, QuadraticL1, Zero, make_problem

# 3x3 coupling matrix whose cyclic 3-block scheme diverges.
COUNTEREXAMPLE_A = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, 1.0, 2.0],
        [1.0, 2.0, 2.0],
    ]
)


def counterexample_problem(beta: float = 4.0) -> MultiBlockProblem:
    """min 0 s.t. A x = 0 with three scalar blocks (columns of A)."""
    blocks = [(1, Zero(), COUNTEREXAMPLE_A[:, [i]]) for i in range(3)]
    return make_problem(blocks, np.zeros(3), beta)


def counterexample_x0() -> list[np.ndarray]:
    return [np.ones(1), np.ones(1), np.ones(1)]


def quad_l1_problem(beta: float = 4.0, tau: float = 1.0) -> MultiBlockProblem:
    """Ten 2-d blocks with objective x^T Theta_i x + tau |x|_1.

    Theta_i = [[5+i, 1], [1, 5+i]] and A_i has rows (2k-1+i, 2k+i) for
    k = 1..10, i = 1..10.  Every column of every A_i is (1,3,...,19) plus
    a constant, so the stacked constraint matrix has rank 2 and the target
    must lie in that 2-d column space to be attainable.  The right-hand
    side is the arithmetic progression (1, 11, 21, ..., 91): the unique
    feasible vector matching the first two published entries.  See README.
    """
    blocks = []
    for i in range(1, 11):
        theta = np.array([[5.0 + i, 1.0], [1.0, 5.0 + i]])
        a = np.array([[2 * k - 1 + i, 2 * k + i] for k in range(1, 11)], dtype=float)
        blocks.append((2, QuadraticL1(theta=theta, tau=tau), a))
    b = np.arange(1.0, 92.0, 10.0)
    return make_problem(blocks, b, beta)


def random_quadratic_problem(rng, m: int, dim: int = 1, beta: float = 1.0, zero_objective: bool = True) -> MultiBlockProblem:
    """Random full-column-rank instance for property suites.

    Draws a square coupling matrix (p = m*dim) rejected until reasonably
    conditioned, with zero or random PSD quadratic objectives.
    """
    n = m * dim
    while True:
        a = rng.standard_normal((n, n))
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[-1] > 0.05 * sv[0]:
            break
    blocks = []
    for i in range(m):
        ai = a[:, i * dim : (i + 1) * dim]
        if zero_objective:
            term = Zero()
        else:
            base = rng.standard_normal((dim, dim))
            term = Quadratic(theta=base @ base.T + 0.1 * np.eye(dim))
        blocks.append((dim, term, ai))
    b = rng.standard_normal(n)
    return make_problem(blocks, b, beta)

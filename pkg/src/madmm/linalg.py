"""Minimal dense linear algebra kernel.

Vectors and matrices are plain float64 numpy arrays.  Everything here is a
pure function; nothing mutates its arguments.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NoConvergence,
    NonpositiveDiagonal,
    NonSymmetric,
    SingularMatrix,
)

# Pivot threshold relative to the largest entry magnitude of the matrix.
PIVOT_RTOL = 1e-12

# Desk scale: eigenproblems beyond this size are out of scope.
EIG_MAX_DIM = 64


def _as_square(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    return m


def solve_linear(m, rhs) -> np.ndarray:
    """Solve m @ x = rhs by Gaussian elimination with partial pivoting.

    ``rhs`` may be a vector or a matrix of stacked right-hand sides.
    Raises SingularMatrix when a pivot falls below ``PIVOT_RTOL`` relative
    to the largest entry magnitude of ``m``.
    """
    a = _as_square(m).copy()
    b = np.asarray(rhs, dtype=float).copy()
    n = a.shape[0]
    if b.shape[0] != n:
        raise DimensionMismatch(f"rhs has {b.shape[0]} rows, matrix has {n}")
    one_dim = b.ndim == 1
    if one_dim:
        b = b[:, None]

    scale = np.max(np.abs(a)) if n else 0.0
    threshold = PIVOT_RTOL * max(scale, 1e-300)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[piv, k]) <= threshold:
            raise SingularMatrix(f"pivot {abs(a[piv, k]):.3e} at column {k} below threshold")
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        mult = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= np.outer(mult, a[k, k:])
        b[k + 1 :] -= np.outer(mult, b[k])

    x = np.empty_like(b)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x[:, 0] if one_dim else x


def invert(m) -> np.ndarray:
    """Dense inverse via solve_linear against the identity."""
    a = _as_square(m)
    return solve_linear(a, np.eye(a.shape[0]))


def eigenvalues(m) -> list[complex]:
    """All eigenvalues (with multiplicity) of a small dense real matrix.

    Backed by LAPACK's Hessenberg + shifted-QR path (numpy.linalg).
    Returned sorted by (real, imag) so output is deterministic.
    """
    a = _as_square(m)
    n = a.shape[0]
    if n > EIG_MAX_DIM:
        raise DimensionMismatch(f"eigenproblem dimension {n} exceeds {EIG_MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("matrix has non-finite entries")
    try:
        vals = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"QR iteration did not converge: {exc}") from exc
    return sorted((complex(v) for v in vals), key=lambda z: (z.real, z.imag))


def spectral_radius_of(m) -> float:
    """Maximum eigenvalue modulus."""
    return max((abs(z) for z in eigenvalues(m)), default=0.0)


@dataclass(frozen=True)
class SgsSplit:
    """Symmetric Gauss-Seidel decomposition G = L + L^T + D.

    ``lower`` is the strictly lower triangle, ``diag`` the diagonal as a
    1-d array, and ``gtilde`` the preconditioner (L+D) D^-1 (L^T+D).
    """

    lower: np.ndarray
    diag: np.ndarray
    gtilde: np.ndarray

    @property
    def dmat(self) -> np.ndarray:
        return np.diag(self.diag)


def sgs_split(g) -> SgsSplit:
    """Split a symmetric positive-diagonal matrix for SGS preconditioning.

    The parts are entrywise copies, so lower + lower.T + diag reproduces g
    exactly.  gtilde - g = L D^-1 L^T is positive semidefinite, which is
    what makes the preconditioned eigenvalues land in (0, 1].
    """
    g = _as_square(g)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(g))) if g.size else 0.0)
    if np.max(np.abs(g - g.T), initial=0.0) > tol:
        raise NonSymmetric("matrix is not symmetric within 1e-12")
    d = np.array(np.diag(g), dtype=float)
    if np.any(d <= 0.0):
        raise NonpositiveDiagonal("diagonal entries must be strictly positive")
    lower = np.tril(g, -1)
    gtilde = (lower + np.diag(d)) @ ((lower.T + np.diag(d)) / d[:, None])
    return SgsSplit(lower=lower, diag=d, gtilde=gtilde)


def block_sgs_split(g, dims) -> SgsSplit:
    """Blockwise SGS split of g for the partition given by ``dims``.

    The diagonal part is the block diagonal, the lower part the strictly
    block-lower triangle; for all-scalar blocks this coincides with
    sgs_split.  ``diag`` in the result holds the block-diagonal matrix's
    diagonal entries only for reporting; gtilde uses full blocks.
    """
    g = _as_square(g)
    n = g.shape[0]
    if sum(dims) != n:
        raise DimensionMismatch(f"partition {dims} does not sum to {n}")
    dblock = np.zeros_like(g)
    lower = np.zeros_like(g)
    offs = np.cumsum([0] + list(dims))
    for i in range(len(dims)):
        ri = slice(offs[i], offs[i + 1])
        dblock[ri, ri] = g[ri, ri]
        for j in range(i):
            rj = slice(offs[j], offs[j + 1])
            lower[ri, rj] = g[ri, rj]
    gtilde = (lower + dblock) @ solve_linear(dblock, lower.T + dblock)
    return SgsSplit(lower=lower, diag=np.diag(dblock).copy(), gtilde=gtilde)


def matrix_rank_elim(m, tol=1e-10) -> int:
    """Rank by rank-revealing Gaussian elimination with full pivoting."""
    a = np.asarray(m, dtype=float).copy()
    if a.ndim != 2:
        raise DimensionMismatch("rank needs a 2-d array")
    scale = max(float(np.max(np.abs(a))) if a.size else 0.0, 1e-300)
    rank = 0
    rows, cols = a.shape
    while rank < min(rows, cols):
        sub = np.abs(a[rank:, rank:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[i, j] <= tol * scale:
            break
        a[[rank, rank + i]] = a[[rank + i, rank]]
        a[:, [rank, rank + j]] = a[:, [rank + j, rank]]
        mult = a[rank + 1 :, rank] / a[rank, rank]
        a[rank + 1 :, rank:] -= np.outer(mult, a[rank, rank:])
        rank += 1
    return rank

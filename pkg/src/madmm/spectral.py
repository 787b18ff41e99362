"""Linear-case operators and spectral verification.

For zero/quadratic objectives every solver step is an affine map of the
stacked state (x, mu) with mu = -lambda.  This module assembles those maps
analytically (KKT system, Schur complement, SGS-preconditioned compact
iteration), extracts them from any stepper by probing, and checks the
eigenvalue mappings that certify convergence:

* the symmetric-sweep quadratic  nu^2 - xi(1+c) nu + c xi = 0  tying each
  eigenvalue nu of the update operator to an eigenvalue xi of the
  preconditioned primal matrix H = Gtilde^-1 G, with c = omega/beta;
* the randomly-permuted-update relation  (1-lam)^2 / (1-2 lam) in eig(Q A^T A).

Note the compact iteration matrix is T = I - B^-1 M; the quadratic above
lives on the eigenvalues nu of B^-1 M, i.e. nu = 1 - lam_T.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidParameter,
    MappingViolation,
    NotAffine,
    SingularG,
    SingularMatrix,
    TooManyBlocks,
)
from .linalg import (
    block_sgs_split,
    eigenvalues,
    matrix_rank_elim,
    solve_linear,
)
from .problem import MultiBlockProblem, QuadraticL1, SolverState
from .solvers import step_cyclic, step_gadmm, step_permuted, step_sadmm

MATCH_TOL = 1e-7  # eigenvalue mapping matches
MODULUS_TOL = 1e-8  # complex-case |nu - 1| = sqrt(1 - xi)
BOUNDARY_XI_TOL = 1e-8  # xi within this of 1 is the structural boundary case
DEFLATE_EIG_TOL = 1e-8  # deflated dual-kernel eigenvalues must sit at 1
RANK_TOL = 1e-10
PROBE_TOL = 1e-9


@dataclass(frozen=True)
class KktSystem:
    """Saddle-point system [[G, -A^T], [-A, 0]] (x; mu) = (beta A^T b; -b)."""

    g: np.ndarray
    a: np.ndarray
    rhs_top: np.ndarray
    rhs_bottom: np.ndarray
    beta: float
    dims: tuple[int, ...]


@dataclass(frozen=True)
class MappingPair:
    lam: complex  # eigenvalue nu of B^-1 M (= 1 - eigenvalue of T)
    xi: complex  # recovered eigenvalue of H
    c: float
    boundary: bool  # xi at the structural boundary value 1


@dataclass
class SpectralReport:
    spectrum: list[complex]  # eigenvalues of the iteration matrix T
    rho: float
    effective_rho: float  # after dual-kernel deflation
    deflated: int
    mapping_pairs: list[MappingPair]


def build_kkt(p: MultiBlockProblem) -> KktSystem:
    """Assemble G = hess(theta) + beta A^T A and the saddle right-hand side."""
    for idx, blk in enumerate(p.blocks):
        if isinstance(blk.objective, QuadraticL1):
            raise NotAffine(f"block {idx} has an L1 term; the KKT system is linear only")
    a = p.a_concat()
    n = p.n_total
    g = np.zeros((n, n))
    offs = np.cumsum([0] + p.dims)
    for i, blk in enumerate(p.blocks):
        ri = slice(offs[i], offs[i + 1])
        g[ri, ri] = blk.objective.hessian(blk.dim)
    g += p.beta * (a.T @ a)
    try:
        solve_linear(g, np.zeros(n))
    except SingularMatrix as exc:
        raise SingularG(f"G is not invertible: {exc}") from exc
    return KktSystem(
        g=g,
        a=a,
        rhs_top=p.beta * (a.T @ p.b),
        rhs_bottom=-p.b.copy(),
        beta=p.beta,
        dims=tuple(p.dims),
    )


def kkt_solve(k: KktSystem):
    """Solve the saddle system; returns (x, mu) with mu the multiplier."""
    n = k.g.shape[0]
    p_rows = k.a.shape[0]
    full = np.zeros((n + p_rows, n + p_rows))
    full[:n, :n] = k.g
    full[:n, n:] = -k.a.T
    full[n:, :n] = -k.a
    sol = solve_linear(full, np.concatenate([k.rhs_top, k.rhs_bottom]))
    return sol[:n], sol[n:]


def schur_complement(k: KktSystem) -> np.ndarray:
    """A G^-1 A^T, the dual-space operator after eliminating the primal."""
    try:
        return k.a @ solve_linear(k.g, k.a.T)
    except SingularMatrix as exc:
        raise SingularG(f"G is not invertible: {exc}") from exc


def sgs_preconditioned_matrix(k: KktSystem) -> np.ndarray:
    """H = Gtilde^-1 G for the blockwise SGS split of G."""
    split = block_sgs_split(k.g, list(k.dims))
    return solve_linear(split.gtilde, k.g)


def sadmm_iteration_matrix(k: KktSystem, omega: float) -> np.ndarray:
    """T = I - B^-1 M with B = [[-Gtilde, 0],[omega A, I]], M = [[-G, A^T],[omega A, 0]].

    Gtilde comes from the blockwise SGS split matching the solver's block
    partition (elementwise when all blocks are scalar).
    """
    n = k.g.shape[0]
    p_rows = k.a.shape[0]
    try:
        split = block_sgs_split(k.g, list(k.dims))
        bmat = np.zeros((n + p_rows, n + p_rows))
        bmat[:n, :n] = -split.gtilde
        bmat[n:, :n] = omega * k.a
        bmat[n:, n:] = np.eye(p_rows)
        mmat = np.zeros((n + p_rows, n + p_rows))
        mmat[:n, :n] = -k.g
        mmat[:n, n:] = k.a.T
        mmat[n:, :n] = omega * k.a
        return np.eye(n + p_rows) - solve_linear(bmat, mmat)
    except SingularMatrix as exc:
        raise SingularG(f"SGS factor is not invertible: {exc}") from exc


def sadmm_iteration_offset(k: KktSystem, omega: float) -> np.ndarray:
    """Affine offset v = B^-1 (-beta A^T b; omega b) of the compact recursion."""
    n = k.g.shape[0]
    p_rows = k.a.shape[0]
    split = block_sgs_split(k.g, list(k.dims))
    bmat = np.zeros((n + p_rows, n + p_rows))
    bmat[:n, :n] = -split.gtilde
    bmat[n:, :n] = omega * k.a
    bmat[n:, n:] = np.eye(p_rows)
    rhs = np.concatenate([-k.rhs_top, -omega * k.rhs_bottom])
    return solve_linear(bmat, rhs)


def make_stepper(p: MultiBlockProblem, variant: str, omega=None, alpha=0.2, order=None):
    """One solver step as a map on the stacked vector (x, mu), mu = -lambda."""
    n = p.n_total
    offs = np.cumsum([0] + p.dims)

    def apply_step(z):
        z = np.asarray(z, dtype=float)
        xs = [z[offs[i] : offs[i + 1]].copy() for i in range(p.m)]
        state = SolverState(x=xs, lam=-z[n:].copy(), it=0, history=[])
        if variant == "cyclic":
            out = step_cyclic(p, state)
        elif variant == "rp":
            if order is None:
                raise InvalidParameter("variant 'rp' needs a fixed permutation; pass order=")
            out = step_permuted(p, state, order)
        elif variant == "gadmm":
            out = step_gadmm(p, state, alpha)
        elif variant == "sadmm":
            out = step_sadmm(p, state, p.beta if omega is None else omega)
        else:
            raise InvalidParameter(f"unknown variant {variant!r}")
        return np.concatenate([np.concatenate(out.x), -out.lam])

    return apply_step


def extract_iteration_matrix(stepper, n_total: int, probes: int = 10):
    """Black-box linearization: offset v = stepper(0), columns from basis probes.

    Verifies affineness on random probes and raises NotAffine when the
    stepper fails the check (as any L1 objective does).
    """
    v = stepper(np.zeros(n_total))
    t = np.empty((n_total, n_total))
    for j in range(n_total):
        e = np.zeros(n_total)
        e[j] = 1.0
        t[:, j] = stepper(e) - v
    rng = np.random.default_rng(0x5EED)
    for _ in range(probes):
        z = rng.standard_normal(n_total)
        err = float(np.max(np.abs(stepper(z) - (t @ z + v))))
        if err > PROBE_TOL:
            raise NotAffine(f"probe deviation {err:.3e} exceeds {PROBE_TOL}")
    return t, v


def spectral_radius(m) -> float:
    """Max eigenvalue modulus."""
    return max((abs(z) for z in eigenvalues(m)), default=0.0)


def _real_spectrum(h):
    vals = eigenvalues(h)
    for z in vals:
        if abs(z.imag) > 1e-9:
            raise MappingViolation(f"H eigenvalue {z} is not real", pair=(z, None))
    return [z.real for z in vals]


def _quad_roots(xi: float, c: float):
    disc = complex(xi * xi * (1 + c) ** 2 - 4 * xi * c)
    root = np.sqrt(disc)
    return (xi * (1 + c) + root) / 2.0, (xi * (1 + c) - root) / 2.0


def theorem_map_check(t, h, c: float, a=None) -> SpectralReport:
    """Verify the eigenvalue mapping between the iteration matrix and H.

    For each eigenvalue nu of B^-1 M (recovered as 1 - lam for lam in
    eig(T)), the ratio xi = nu^2 / ((1+c) nu - c) must be an eigenvalue of
    H in (0, 1]; conversely both roots of nu^2 - xi(1+c) nu + c xi = 0 must
    appear for every eigenvalue xi of H.  Complex nu must satisfy
    |nu - 1| = sqrt(1 - xi).  xi at the structural boundary value 1
    (present whenever the SGS lower factor has a zero leading row, i.e.
    always) is flagged rather than rejected; its roots are {1, c}.

    When ``a`` is supplied and has more rows than columns, the p - rank(A)
    stationary dual-kernel directions (eigenvalue exactly 1 of T) are
    deflated first and the effective spectral radius is reported on the
    complement.
    """
    if not 0.0 < c < 2.0:
        raise InvalidParameter(f"c = omega/beta must lie in (0,2), got {c}")
    spectrum = eigenvalues(t)
    n_defl = 0
    if a is not None:
        a = np.asarray(a, dtype=float)
        n_defl = a.shape[0] - matrix_rank_elim(a, tol=RANK_TOL)
    by_dist_to_one = sorted(spectrum, key=lambda z: abs(z - 1.0))
    for z in by_dist_to_one[:n_defl]:
        if abs(z - 1.0) > DEFLATE_EIG_TOL:
            raise MappingViolation(
                f"expected a unit dual-kernel eigenvalue, found {z}", pair=(z, None)
            )
    kept = by_dist_to_one[n_defl:]
    rho = max((abs(z) for z in spectrum), default=0.0)
    effective_rho = max((abs(z) for z in kept), default=0.0)

    hs = _real_spectrum(h)
    for xi in hs:
        if not 0.0 < xi <= 1.0 + BOUNDARY_XI_TOL:
            raise MappingViolation(f"H eigenvalue {xi} outside (0, 1]", pair=(xi, None))

    nus = [1.0 - z for z in kept]
    pairs = []
    for nu in nus:
        den = (1 + c) * nu - c
        if abs(den) < 1e-12:
            # removable point of the recovery formula: match via roots instead
            xi = min(hs, key=lambda x: min(abs(r - nu) for r in _quad_roots(x, c)))
            if min(abs(r - nu) for r in _quad_roots(xi, c)) > MATCH_TOL:
                raise MappingViolation(f"nu = {nu} matches no root pair", pair=(nu, None))
            xi = complex(xi)
        else:
            xi = nu * nu / den
        boundary = abs(xi - 1.0) <= BOUNDARY_XI_TOL
        if boundary:
            # xi = 1 factors the quadratic as (nu - 1)(nu - c)
            if min(abs(nu - 1.0), abs(nu - c)) > MATCH_TOL:
                raise MappingViolation(
                    f"boundary pair nu = {nu} is neither 1 nor c = {c}", pair=(nu, xi)
                )
        else:
            if abs(xi.imag) > MATCH_TOL:
                raise MappingViolation(f"recovered xi = {xi} is not real", pair=(nu, xi))
            if not 0.0 < xi.real < 1.0:
                raise MappingViolation(f"recovered xi = {xi} outside (0,1)", pair=(nu, xi))
            if min(abs(xi.real - x) for x in hs) > MATCH_TOL:
                raise MappingViolation(
                    f"xi = {xi.real} matches no eigenvalue of H", pair=(nu, xi)
                )
            if abs(nu.imag) > 1e-9:
                if abs(abs(nu - 1.0) - np.sqrt(1.0 - xi.real)) > MODULUS_TOL:
                    raise MappingViolation(
                        f"complex nu = {nu} breaks |nu-1| = sqrt(1-xi)", pair=(nu, xi)
                    )
        pairs.append(MappingPair(lam=complex(nu), xi=complex(xi), c=c, boundary=boundary))

    for xi in hs:
        for root in _quad_roots(xi, c):
            if min(abs(root - nu) for nu in nus) > MATCH_TOL:
                raise MappingViolation(
                    f"root {root} of xi = {xi} missing from the spectrum", pair=(root, xi)
                )

    return SpectralReport(
        spectrum=spectrum,
        rho=rho,
        effective_rho=effective_rho,
        deflated=n_defl,
        mapping_pairs=pairs,
    )


def rp_expected_matrix(p: MultiBlockProblem, q) -> np.ndarray:
    """Update operator [[I-QA^TA, QA^T],[AQA^TA-A, I-AQA^T]] for a supplied Q.

    This is the beta = omega = 1 convention of the randomly-permuted
    analysis; Q = Gtilde^-1 recovers the symmetric-sweep case.
    """
    if p.m > 8:
        raise TooManyBlocks(f"permutation enumeration capped at 8 blocks, got {p.m}")
    for idx, blk in enumerate(p.blocks):
        if isinstance(blk.objective, QuadraticL1):
            raise NotAffine(f"block {idx} has an L1 term")
    q = np.asarray(q, dtype=float)
    a = p.a_concat()
    n = a.shape[1]
    p_rows = a.shape[0]
    s = a.T @ a
    m = np.zeros((n + p_rows, n + p_rows))
    m[:n, :n] = np.eye(n) - q @ s
    m[:n, n:] = q @ a.T
    m[n:, :n] = a @ q @ s - a
    m[n:, n:] = np.eye(p_rows) - a @ q @ a.T
    return m


def rp_mapping_check(m, q, a):
    """Assert (1-lam)^2/(1-2 lam) lands in eig(Q A^T A) for every lam of m.

    Returns the (lam, mapped value) pairs; raises MappingViolation on the
    first miss.
    """
    q = np.asarray(q, dtype=float)
    a = np.asarray(a, dtype=float)
    targets = eigenvalues(q @ (a.T @ a))
    pairs = []
    for lam in eigenvalues(m):
        den = 1.0 - 2.0 * lam
        if abs(den) < 1e-12:
            raise MappingViolation(f"eigenvalue {lam} sits at the pole 1/2", pair=(lam, None))
        mapped = (1.0 - lam) ** 2 / den
        if min(abs(mapped - t) for t in targets) > MATCH_TOL:
            raise MappingViolation(
                f"mapped value {mapped} of eigenvalue {lam} misses eig(QA^TA)",
                pair=(lam, mapped),
            )
        pairs.append((lam, mapped))
    return pairs


def rp_average_gs_inverse(a, dims) -> np.ndarray:
    """Mean over all block permutations of the Gauss-Seidel sweep inverse.

    For each permutation sigma the sweep on A^T A x = f in sigma order is
    x + Q_sigma (f - A^T A x) with Q_sigma the inverse of the block lower
    triangle of the sigma-reordered matrix; the uniform average is the
    expected update operator of the randomly permuted scheme (beta = 1).
    """
    a = np.asarray(a, dtype=float)
    m_blocks = len(dims)
    if m_blocks > 8:
        raise TooManyBlocks(f"permutation enumeration capped at 8 blocks, got {m_blocks}")
    s = a.T @ a
    n = s.shape[0]
    offs = np.cumsum([0] + list(dims))
    groups = [list(range(offs[i], offs[i + 1])) for i in range(m_blocks)]
    total = np.zeros((n, n))
    count = 0
    for sigma in itertools.permutations(range(m_blocks)):
        idx = np.array([k for blk in sigma for k in groups[blk]])
        perm_s = s[np.ix_(idx, idx)]
        perm_dims = [dims[blk] for blk in sigma]
        lhat = np.zeros_like(perm_s)
        o2 = np.cumsum([0] + perm_dims)
        for i in range(m_blocks):
            lhat[o2[i] : o2[i + 1], : o2[i + 1]] = perm_s[o2[i] : o2[i + 1], : o2[i + 1]]
        linv = solve_linear(lhat, np.eye(n))
        qs = np.zeros((n, n))
        qs[np.ix_(idx, idx)] = linv
        total += qs
        count += 1
    return total / count

"""Exact per-block minimizers used inside every ADMM sweep.

Each block update minimizes  theta_i(x) + (beta/2) ||A_i x + r||^2  where r
collects the other blocks, -b and lambda/beta.  Completing the square turns
this into  (1/2) x^T H x - q^T x (+ tau |x|_1)  with H = hess(theta_i)
+ beta A_i^T A_i and q = -beta A_i^T r.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoConvergence
from .linalg import solve_linear

CD_MAX_SWEEPS = 10000
CD_STEP_TOL = 1e-12
CD_CERT_TOL = 1e-10


@dataclass(frozen=True)
class BlockSubproblem:
    h: np.ndarray
    q: np.ndarray
    tau: float


def assemble(term, a, r, beta) -> BlockSubproblem:
    """Build the quadratic (+L1) block subproblem for one ADMM update."""
    a = np.asarray(a, dtype=float)
    r = np.asarray(r, dtype=float)
    if a.ndim != 2 or r.shape != (a.shape[0],):
        raise DimensionMismatch(f"A {a.shape} and r {r.shape} are inconsistent")
    dim = a.shape[1]
    h = term.hessian(dim) + beta * (a.T @ a)
    q = -beta * (a.T @ r)
    return BlockSubproblem(h=h, q=q, tau=float(term.tau))


def solve_quadratic(s: BlockSubproblem) -> np.ndarray:
    """Closed-form minimizer H^-1 q of the smooth subproblem."""
    return solve_linear(s.h, s.q)


def certificate_gap(s: BlockSubproblem, x) -> float:
    """Max subgradient-optimality violation of x for the L1 subproblem.

    Zero coordinates need |(Hx-q)_j| <= tau, active ones need
    (Hx-q)_j + tau*sign(x_j) = 0; returns the largest breach.
    """
    g = s.h @ x - s.q
    worst = 0.0
    for j in range(x.shape[0]):
        if x[j] == 0.0:
            worst = max(worst, abs(g[j]) - s.tau)
        else:
            worst = max(worst, abs(g[j] + s.tau * np.sign(x[j])))
    return worst


def _refine_on_pattern(s: BlockSubproblem, x):
    """Exact restricted solve on the current sign pattern of x.

    Solves H_AA z = q_A - tau*sign(x_A) over the active coordinates; valid
    only if the solve keeps every active sign, else returns None.
    """
    active = np.flatnonzero(x)
    if active.size == 0:
        return np.zeros_like(x)
    signs = np.sign(x[active])
    sub_h = s.h[np.ix_(active, active)]
    try:
        z = solve_linear(sub_h, s.q[active] - s.tau * signs)
    except Exception:
        return None
    if np.any(np.sign(z) != signs):
        return None
    out = np.zeros_like(x)
    out[active] = z
    return out


def solve_quadratic_l1(s: BlockSubproblem, x0=None) -> np.ndarray:
    """Minimize (1/2) x^T H x - q^T x + tau |x|_1 by exact coordinate descent.

    Coordinates are swept in fixed order 0..n-1 (bit-reproducible runs);
    each update is a one-dimensional soft-threshold with the rest held
    fixed.  After each sweep the current sign pattern is refined by an
    exact restricted solve; CD alone stalls far above the optimality
    certificate on badly conditioned H, the refinement pins it once the
    pattern has settled.  Stops when the certificate holds at 1e-10 or the
    largest coordinate change is <= 1e-12.
    """
    n = s.q.shape[0]
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (n,):
        raise DimensionMismatch(f"warm start has shape {x.shape}, expected ({n},)")
    hdiag = np.diag(s.h)
    g = s.h @ x  # running H x
    for _ in range(CD_MAX_SWEEPS):
        max_step = 0.0
        for j in range(n):
            rho = s.q[j] - (g[j] - hdiag[j] * x[j])
            new = np.sign(rho) * max(abs(rho) - s.tau, 0.0) / hdiag[j]
            delta = new - x[j]
            if delta != 0.0:
                g += s.h[:, j] * delta
                x[j] = new
                max_step = max(max_step, abs(delta))
        refined = _refine_on_pattern(s, x)
        if refined is not None and certificate_gap(s, refined) <= CD_CERT_TOL:
            return refined
        if certificate_gap(s, x) <= CD_CERT_TOL or max_step <= CD_STEP_TOL:
            return x
    raise NoConvergence(f"coordinate descent exceeded {CD_MAX_SWEEPS} sweeps")


def solve_block(s: BlockSubproblem, x0=None) -> np.ndarray:
    """Dispatch on tau: direct solve for smooth blocks, CD otherwise."""
    if s.tau == 0.0:
        return solve_quadratic(s)
    return solve_quadratic_l1(s, x0=x0)

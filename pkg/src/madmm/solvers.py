"""The four multi-block ADMM variants and the iteration driver.

Every step function is pure: it takes a problem and a solver state and
returns a fresh state with one more history row (iteration, primal
residual, objective).  The driver ``run`` applies the configured step
until the iteration budget or residual tolerance is hit, converting
blow-ups into a structured ``Diverged`` error.
"""

from dataclasses import dataclass

import numpy as np

from . import subproblem
from .errors import Diverged, InvalidParameter
from .linalg import solve_linear
from .problem import (
    MultiBlockProblem,
    SolverState,
    constraint_gap,
    objective_value,
    primal_residual,
)

DIVERGE_LIMIT = 1e12

VARIANTS = ("cyclic", "rp", "gadmm", "sadmm")

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Seedable 64-bit generator (SplitMix64 state transition).

    Fully specified so permutation streams reproduce across languages:
      state = (state + 0x9E3779B97F4A7C15) mod 2^64
      z = state
      z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
      z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
      output = z ^ (z >> 31)
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


def random_permutation(rng: SplitMix64, m: int) -> np.ndarray:
    """Uniform permutation of 0..m-1 by Fisher-Yates.

    For i = m-1 down to 1: j = next_u64() mod (i+1); swap entries i and j.
    """
    perm = np.arange(m)
    for i in range(m - 1, 0, -1):
        j = rng.next_u64() % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@dataclass
class SolverParams:
    variant: str
    max_iters: int = 500
    tol: float = 0.0
    seed: int = 42
    alpha: float = 0.2
    omega: float | None = None  # defaults to beta at run time


def _sweep(p: MultiBlockProblem, xs, lam, order) -> None:
    """Gauss-Seidel sweep over blocks in ``order``, updating xs in place.

    Each visited block is minimized exactly with all other blocks held at
    their current (latest) values.
    """
    total = constraint_gap(p, xs) + p.b  # sum_j A_j x_j
    shift = lam / p.beta - p.b
    for i in order:
        blk = p.blocks[i]
        partial = total - blk.a @ xs[i]
        sub = subproblem.assemble(blk.objective, blk.a, partial + shift, p.beta)
        xs[i] = subproblem.solve_block(sub, x0=xs[i])
        total = partial + blk.a @ xs[i]


def _finish(p, s, xs, lam) -> SolverState:
    it = s.it + 1
    history = list(s.history)
    history.append((it, primal_residual(p, xs), objective_value(p, xs)))
    return SolverState(x=xs, lam=lam, it=it, history=history)


def step_cyclic(p: MultiBlockProblem, s: SolverState) -> SolverState:
    """Direct extension: one sweep in block order, then dual ascent."""
    xs = [xi.copy() for xi in s.x]
    _sweep(p, xs, s.lam, range(p.m))
    lam = s.lam + p.beta * constraint_gap(p, xs)
    return _finish(p, s, xs, lam)


def step_permuted(p: MultiBlockProblem, s: SolverState, order) -> SolverState:
    """One sweep in the given block order, then dual ascent."""
    order = list(order)
    if sorted(order) != list(range(p.m)):
        raise InvalidParameter(f"{order} is not a permutation of 0..{p.m - 1}")
    xs = [xi.copy() for xi in s.x]
    _sweep(p, xs, s.lam, order)
    lam = s.lam + p.beta * constraint_gap(p, xs)
    return _finish(p, s, xs, lam)


def step_rp(p: MultiBlockProblem, s: SolverState, rng: SplitMix64):
    """Randomly permuted sweep; returns (state, drawn permutation)."""
    sigma = random_permutation(rng, p.m)
    return step_permuted(p, s, sigma), sigma


def _block_upper_diag(g, dims):
    """(L^T+D, D) of g = L + L^T + D in the blockwise sense."""
    n = g.shape[0]
    ud = np.zeros_like(g)
    dblock = np.zeros_like(g)
    offs = np.cumsum([0] + list(dims))
    for i in range(len(dims)):
        ri = slice(offs[i], offs[i + 1])
        dblock[ri, ri] = g[ri, ri]
        ud[ri, offs[i] :] = g[ri, offs[i] :]
    return ud, dblock


def _concat(xs) -> np.ndarray:
    return np.concatenate(xs)


def _split(p: MultiBlockProblem, v) -> list[np.ndarray]:
    offs = np.cumsum([0] + p.dims)
    return [v[offs[i] : offs[i + 1]].copy() for i in range(p.m)]


def step_gadmm(p: MultiBlockProblem, s: SolverState, alpha: float) -> SolverState:
    """Prediction sweep plus Gaussian back-substitution correction.

    The correction moves toward the prediction through the upper factor of
    A^T A = D + L + L^T (blockwise): solve (L^T + D) y = D (xt - x) from
    the last block upward, then x += alpha * y.  The upper factor is what
    makes this a back substitution; the lower one is spectrally unstable
    for every alpha on the divergence benchmark.  The dual moves by
    alpha * beta times the prediction's constraint gap.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter(f"alpha must lie in (0,1), got {alpha}")
    xt = [xi.copy() for xi in s.x]
    _sweep(p, xt, s.lam, range(p.m))
    a = p.a_concat()
    ud, dblock = _block_upper_diag(a.T @ a, p.dims)
    delta = _concat(xt) - _concat(s.x)
    correction = solve_linear(ud, dblock @ delta)
    xs = _split(p, _concat(s.x) + alpha * correction)
    lam = s.lam + alpha * p.beta * constraint_gap(p, xt)
    return _finish(p, s, xs, lam)


def step_sadmm(p: MultiBlockProblem, s: SolverState, omega: float) -> SolverState:
    """Symmetric sweep (forward then backward) plus Richardson dual step.

    The backward pass revisits blocks m-1..1 only, so block m keeps its
    forward value; that boundary makes the linear-case step coincide with
    the symmetric Gauss-Seidel preconditioner on the primal normal system.
    """
    if not 0.0 < omega < 2.0 * p.beta:
        raise InvalidParameter(f"omega must lie in (0, {2 * p.beta}), got {omega}")
    xs = [xi.copy() for xi in s.x]
    _sweep(p, xs, s.lam, range(p.m))  # forward
    _sweep(p, xs, s.lam, range(p.m - 2, -1, -1))  # backward, block m untouched
    lam = s.lam + omega * constraint_gap(p, xs)
    return _finish(p, s, xs, lam)


def initial_state(p: MultiBlockProblem, x0=None, lambda0=None) -> SolverState:
    xs = [np.array(xi, dtype=float) for xi in (x0 if x0 is not None else p.zero_x())]
    lam = np.array(lambda0, dtype=float) if lambda0 is not None else np.zeros(p.p)
    if len(xs) != p.m or any(xi.shape != (blk.dim,) for xi, blk in zip(xs, p.blocks)):
        raise InvalidParameter("x0 block shapes do not match the problem")
    if lam.shape != (p.p,):
        raise InvalidParameter(f"lambda0 has shape {lam.shape}, expected ({p.p},)")
    state = SolverState(x=xs, lam=lam, it=0, history=[])
    state.history.append((0, primal_residual(p, xs), objective_value(p, xs)))
    return state


def run(p: MultiBlockProblem, params: SolverParams, x0=None, lambda0=None, on_iteration=None) -> SolverState:
    """Drive the chosen variant until max_iters or residual <= tol.

    Deterministic given (params, seed).  Raises Diverged (with the partial
    state attached) once the primal residual exceeds 1e12 or goes
    non-finite, instead of letting floats overflow silently.
    """
    if params.variant not in VARIANTS:
        raise InvalidParameter(f"unknown variant {params.variant!r}; use one of {VARIANTS}")
    if params.max_iters < 0:
        raise InvalidParameter("max_iters must be nonnegative")
    if np.isnan(params.tol) or params.tol < 0.0:
        raise InvalidParameter("tol must be nonnegative")
    omega = p.beta if params.omega is None else params.omega
    if params.variant == "sadmm" and not 0.0 < omega < 2.0 * p.beta:
        raise InvalidParameter(f"omega must lie in (0, {2 * p.beta}), got {omega}")
    if params.variant == "gadmm" and not 0.0 < params.alpha < 1.0:
        raise InvalidParameter(f"alpha must lie in (0,1), got {params.alpha}")

    state = initial_state(p, x0=x0, lambda0=lambda0)
    rng = SplitMix64(params.seed)
    if on_iteration is not None:
        on_iteration(state)
    res = state.history[-1][1]
    while state.it < params.max_iters and res > params.tol:
        if params.variant == "cyclic":
            state = step_cyclic(p, state)
        elif params.variant == "rp":
            state, _ = step_rp(p, state, rng)
        elif params.variant == "gadmm":
            state = step_gadmm(p, state, params.alpha)
        else:
            state = step_sadmm(p, state, omega)
        res = state.history[-1][1]
        if on_iteration is not None:
            on_iteration(state)
        if not np.isfinite(res) or res > DIVERGE_LIMIT:
            raise Diverged(
                f"primal residual {res:.3e} exceeded {DIVERGE_LIMIT:.0e} at iteration {state.it}",
                state=state,
            )
    return state

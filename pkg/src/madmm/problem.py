"""Problem definition, validation and JSON ingestion.

A multi-block problem is  min sum_i theta_i(x_i)  subject to
sum_i A_i x_i = b,  with penalty beta.  Objective terms are zero,
a quadratic form x^T Theta x, or that plus a weighted L1 norm.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidPenalty,
    ParseError,
    SingularBlockGram,
)

GRAM_MIN_EIG = 1e-10


def _frozen(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Zero:
    """No objective contribution."""

    def value(self, x) -> float:
        return 0.0

    def hessian(self, dim) -> np.ndarray:
        return np.zeros((dim, dim))

    @property
    def tau(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Quadratic:
    """theta(x) = x^T Theta x  (no 1/2 factor; Theta symmetric PSD)."""

    theta: np.ndarray

    def value(self, x) -> float:
        return float(x @ self.theta @ x)

    def hessian(self, dim) -> np.ndarray:
        return 2.0 * self.theta

    @property
    def tau(self) -> float:
        return 0.0


@dataclass(frozen=True)
class QuadraticL1:
    """theta(x) = x^T Theta x + tau * |x|_1."""

    theta: np.ndarray
    tau: float

    def value(self, x) -> float:
        return float(x @ self.theta @ x) + self.tau * float(np.sum(np.abs(x)))

    def hessian(self, dim) -> np.ndarray:
        return 2.0 * self.theta


ObjectiveTerm = Zero | Quadratic | QuadraticL1


@dataclass(frozen=True)
class Block:
    dim: int
    objective: ObjectiveTerm
    a: np.ndarray  # p x dim coupling matrix


@dataclass(frozen=True)
class MultiBlockProblem:
    blocks: tuple[Block, ...]
    b: np.ndarray
    beta: float

    @property
    def m(self) -> int:
        return len(self.blocks)

    @property
    def p(self) -> int:
        return self.b.shape[0]

    @property
    def dims(self) -> list[int]:
        return [blk.dim for blk in self.blocks]

    @property
    def n_total(self) -> int:
        return sum(self.dims)

    def a_concat(self) -> np.ndarray:
        return np.hstack([blk.a for blk in self.blocks])

    def with_beta(self, beta: float) -> "MultiBlockProblem":
        if beta <= 0.0:
            raise InvalidPenalty(f"beta must be positive, got {beta}")
        return MultiBlockProblem(blocks=self.blocks, b=self.b, beta=float(beta))

    def zero_x(self) -> list[np.ndarray]:
        return [np.zeros(blk.dim) for blk in self.blocks]

    def ones_x(self) -> list[np.ndarray]:
        return [np.ones(blk.dim) for blk in self.blocks]


@dataclass
class SolverState:
    """Mutable per-run state: primal blocks, dual vector, history.

    History rows are (iteration, primal residual, objective value).
    """

    x: list[np.ndarray]
    lam: np.ndarray
    it: int = 0
    history: list[tuple[int, float, float]] = field(default_factory=list)

    def copy(self) -> "SolverState":
        return SolverState(
            x=[xi.copy() for xi in self.x],
            lam=self.lam.copy(),
            it=self.it,
            history=list(self.history),
        )


def _check_symmetric_psd(theta, where):
    if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
        raise ParseError(f"{where}: theta must be square, got shape {theta.shape}")
    tol = 1e-12 * max(1.0, float(np.max(np.abs(theta))) if theta.size else 0.0)
    if np.max(np.abs(theta - theta.T), initial=0.0) > tol:
        raise ParseError(f"{where}: theta is not symmetric")
    if theta.size and float(np.min(np.linalg.eigvalsh(theta))) < -1e-10:
        raise ParseError(f"{where}: theta is not positive semidefinite")


def make_problem(blocks, b, beta) -> MultiBlockProblem:
    """Validate and freeze a problem; the one constructor every path uses."""
    if beta is None or float(beta) <= 0.0:
        raise InvalidPenalty(f"beta must be positive, got {beta}")
    b = _frozen(b)
    if b.ndim != 1:
        raise DimensionMismatch(f"b must be a vector, got shape {b.shape}")
    if not blocks:
        raise ParseError("problem has no blocks")
    p = b.shape[0]
    frozen_blocks = []
    for idx, (dim, objective, a) in enumerate(blocks):
        a = _frozen(a)
        if a.ndim != 2 or a.shape != (p, dim):
            raise DimensionMismatch(
                f"block {idx}: A has shape {a.shape}, expected ({p}, {dim})"
            )
        if not np.all(np.isfinite(a)):
            raise ParseError(f"block {idx}: A has non-finite entries")
        if isinstance(objective, (Quadratic, QuadraticL1)):
            theta = _frozen(objective.theta)
            if theta.shape != (dim, dim):
                raise DimensionMismatch(
                    f"block {idx}: theta has shape {theta.shape}, expected ({dim}, {dim})"
                )
            _check_symmetric_psd(theta, f"block {idx}")
            if isinstance(objective, QuadraticL1):
                if objective.tau < 0.0:
                    raise ParseError(f"block {idx}: tau must be nonnegative")
                objective = QuadraticL1(theta=theta, tau=float(objective.tau))
            else:
                objective = Quadratic(theta=theta)
        gram = a.T @ a
        if float(np.min(np.linalg.eigvalsh(gram))) <= GRAM_MIN_EIG:
            raise SingularBlockGram(f"block {idx}: A^T A is numerically singular")
        frozen_blocks.append(Block(dim=int(dim), objective=objective, a=a))
    return MultiBlockProblem(blocks=tuple(frozen_blocks), b=b, beta=float(beta))


def _term_from_dict(doc, idx) -> ObjectiveTerm:
    kind = doc.get("type")
    if kind == "zero":
        return Zero()
    if kind == "quadratic":
        if "theta" not in doc:
            raise ParseError(f"block {idx}: quadratic objective needs 'theta'")
        return Quadratic(theta=np.array(doc["theta"], dtype=float))
    if kind == "quadratic_l1":
        if "theta" not in doc or "tau" not in doc:
            raise ParseError(f"block {idx}: quadratic_l1 needs 'theta' and 'tau'")
        return QuadraticL1(theta=np.array(doc["theta"], dtype=float), tau=float(doc["tau"]))
    raise ParseError(f"block {idx}: unknown objective type {kind!r}")


def problem_from_dict(doc) -> MultiBlockProblem:
    try:
        beta = doc["beta"]
        b = np.array(doc["b"], dtype=float)
        raw_blocks = doc["blocks"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing required field: {exc}") from exc
    blocks = []
    for idx, blk in enumerate(raw_blocks):
        try:
            dim = int(blk["dim"])
            a = np.array(blk["A"], dtype=float)
            term = _term_from_dict(blk.get("objective", {"type": "zero"}), idx)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"block {idx}: {exc}") from exc
        blocks.append((dim, term, a))
    return make_problem(blocks, b, beta)


def load_problem(text: str) -> MultiBlockProblem:
    """Parse and validate a problem from its JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return problem_from_dict(doc)


def problem_to_dict(p: MultiBlockProblem) -> dict:
    blocks = []
    for blk in p.blocks:
        if isinstance(blk.objective, Zero):
            obj = {"type": "zero"}
        elif isinstance(blk.objective, Quadratic):
            obj = {"type": "quadratic", "theta": blk.objective.theta.tolist()}
        else:
            obj = {
                "type": "quadratic_l1",
                "theta": blk.objective.theta.tolist(),
                "tau": blk.objective.tau,
            }
        blocks.append({"dim": blk.dim, "A": blk.a.tolist(), "objective": obj})
    return {"beta": p.beta, "b": p.b.tolist(), "blocks": blocks}


def dump_problem(p: MultiBlockProblem) -> str:
    return json.dumps(problem_to_dict(p), indent=2)


def _check_x(p: MultiBlockProblem, x) -> None:
    if len(x) != p.m:
        raise DimensionMismatch(f"expected {p.m} blocks, got {len(x)}")
    for idx, (blk, xi) in enumerate(zip(p.blocks, x)):
        if np.asarray(xi).shape != (blk.dim,):
            raise DimensionMismatch(f"block {idx}: x has shape {np.asarray(xi).shape}")


def objective_value(p: MultiBlockProblem, x) -> float:
    """sum_i theta_i(x_i)."""
    _check_x(p, x)
    return float(sum(blk.objective.value(np.asarray(xi, dtype=float)) for blk, xi in zip(p.blocks, x)))


def constraint_gap(p: MultiBlockProblem, x) -> np.ndarray:
    """sum_i A_i x_i - b."""
    _check_x(p, x)
    gap = -p.b.copy()
    for blk, xi in zip(p.blocks, x):
        gap += blk.a @ np.asarray(xi, dtype=float)
    return gap


def primal_residual(p: MultiBlockProblem, x) -> float:
    """Euclidean norm of the constraint violation."""
    return float(np.linalg.norm(constraint_gap(p, x)))

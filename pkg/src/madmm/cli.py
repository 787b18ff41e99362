"""Command-line front end: solve, spectra, repro.

Exit codes: 0 success, 1 input/validation error, 2 divergence.  CSV files
carry the header iter,primal_residual,objective,wall_ns; identical flags
and seed reproduce every column byte-for-byte except wall_ns.
"""

import argparse
import itertools
import logging
import os
import sys
import time
from pathlib import Path

from . import presets, spectral
from .errors import Diverged, MadmmError, TooManyBlocks, UnknownExperiment
from .problem import load_problem
from .solvers import SolverParams, run

log = logging.getLogger("madmm")

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("MADMM_LOG", "quiet")
    if level not in _LOG_LEVELS:
        raise MadmmError(f"MADMM_LOG must be one of {sorted(_LOG_LEVELS)}, got {level!r}")
    logging.basicConfig(level=_LOG_LEVELS[level], format="%(name)s %(levelname)s %(message)s")


def _fmt(x: float) -> str:
    return repr(float(x))


class _Recorder:
    """Collects (iter, residual, objective, wall_ns) rows during a run."""

    def __init__(self):
        self.rows = []
        self._t0 = time.monotonic_ns()

    def __call__(self, state):
        it, res, obj = state.history[-1]
        self.rows.append((it, res, obj, time.monotonic_ns() - self._t0))

    def write(self, path):
        with open(path, "w") as fh:
            fh.write("iter,primal_residual,objective,wall_ns\n")
            for it, res, obj, wall in self.rows:
                fh.write(f"{it},{_fmt(res)},{_fmt(obj)},{wall}\n")


def _write_series(path, header, rows):
    with open(path, "w") as fh:
        fh.write(f"iter,{header}\n")
        for it, value in rows:
            fh.write(f"{it},{_fmt(value)}\n")


def _load_config(path, beta_override=None):
    problem = load_problem(Path(path).read_text())
    if beta_override is not None:
        problem = problem.with_beta(beta_override)
    return problem


def cmd_solve(args) -> int:
    problem = _load_config(args.config, args.beta)
    params = SolverParams(
        variant=args.variant,
        max_iters=args.iters,
        tol=args.tol,
        seed=args.seed,
        alpha=args.alpha,
        omega=args.omega,
    )
    recorder = _Recorder()
    # All-ones start: the benchmark problems' canonical initial point.
    x0 = problem.ones_x()
    try:
        state = run(problem, params, x0=x0, on_iteration=recorder)
    except Diverged as exc:
        recorder.write(args.out)
        log.warning("diverged: %s", exc)
        print(f"Diverged: {exc}", file=sys.stderr)
        return 2
    recorder.write(args.out)
    log.info(
        "%s finished at iteration %d with residual %.3e",
        args.variant,
        state.it,
        state.history[-1][1],
    )
    return 0


def _spectra_iteration_matrix(problem, args):
    if args.variant == "rp":
        # No fixed matrix exists; analyze the permutation-averaged update.
        if problem.m > 8:
            raise TooManyBlocks(f"rp spectra enumerates m! sweeps; m = {problem.m} > 8")
        n_total = problem.n_total + problem.p
        mats = []
        offsets = []
        for sigma in itertools.permutations(range(problem.m)):
            stepper = spectral.make_stepper(problem, "rp", order=list(sigma))
            t, v = spectral.extract_iteration_matrix(stepper, n_total)
            mats.append(t)
            offsets.append(v)
        return sum(mats) / len(mats), sum(offsets) / len(offsets)
    stepper = spectral.make_stepper(problem, args.variant, omega=args.omega, alpha=args.alpha)
    return spectral.extract_iteration_matrix(stepper, problem.n_total + problem.p)


def cmd_spectra(args) -> int:
    problem = _load_config(args.config)
    omega = problem.beta if args.omega is None else args.omega
    t, _ = _spectra_iteration_matrix(problem, args)
    spectrum = spectral.eigenvalues(t)
    rho = max(abs(z) for z in spectrum)
    a = problem.a_concat()
    print(f"variant: {args.variant}")
    print(f"rho: {rho:.12g}")

    deflated = 0
    effective = rho
    if args.deflate:
        deflated = a.shape[0] - spectral.matrix_rank_elim(a, tol=spectral.RANK_TOL)
        kept = sorted(spectrum, key=lambda z: abs(z - 1.0))[deflated:]
        effective = max((abs(z) for z in kept), default=0.0)
    print(f"effective_rho: {effective:.12g}  (deflated {deflated} dual-kernel eigenvalues)")

    if args.variant == "sadmm":
        kkt = spectral.build_kkt(problem)
        h = spectral.sgs_preconditioned_matrix(kkt)
        c = omega / problem.beta
        try:
            report = spectral.theorem_map_check(t, h, c, a=a if args.deflate else None)
        except MadmmError as exc:
            print(f"theorem_map_check: FAIL ({exc})")
        else:
            print("mapping pairs (nu, xi, boundary):")
            for pair in report.mapping_pairs:
                nu, xi = pair.lam, pair.xi
                print(
                    f"  {nu.real:.10g}{nu.imag:+.10g}j  "
                    f"{xi.real:.10g}{xi.imag:+.10g}j  {pair.boundary}"
                )
            print("theorem_map_check: PASS")

    print("eigenvalues (re,im,modulus):")
    print("re,im,modulus")
    for z in spectrum:
        print(f"{_fmt(z.real)},{_fmt(z.imag)},{_fmt(abs(z))}")
    return 0


def _repro_run(problem, variant, iters, out_paths, x0, seed=42, omega=None, alpha=0.2):
    params = SolverParams(variant=variant, max_iters=iters, tol=0.0, seed=seed, alpha=alpha, omega=omega)
    try:
        state = run(problem, params, x0=x0)
    except Diverged as exc:
        log.warning("%s diverged: %s", variant, exc)
        print(f"note: {variant} diverged ({exc}); writing partial history", file=sys.stderr)
        state = exc.state
    if len(out_paths) == 1:
        with open(out_paths[0], "w") as fh:
            fh.write("iter,primal_residual,objective,wall_ns\n")
            for it, res, obj in state.history:
                fh.write(f"{it},{_fmt(res)},{_fmt(obj)},0\n")
    else:
        _write_series(out_paths[0], "primal_residual", [(it, res) for it, res, _ in state.history])
        _write_series(out_paths[1], "objective", [(it, obj) for it, _, obj in state.history])
    return state


def cmd_repro(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.name == "counterexample":
        problem = presets.counterexample_problem(beta=4.0)
        x0 = presets.counterexample_x0()
        for variant, kwargs in (
            ("sadmm", {"omega": 4.0}),
            ("rp", {"seed": 42}),
            ("gadmm", {"alpha": 0.2}),
        ):
            _repro_run(
                problem,
                variant,
                200,
                [out_dir / f"counterexample_{variant}.csv"],
                x0,
                **kwargs,
            )
        return 0
    if args.name == "quadl1":
        problem = presets.quad_l1_problem(beta=4.0)
        x0 = problem.zero_x()
        for variant, kwargs in (
            ("sadmm", {"omega": 4.0}),
            ("rp", {"seed": 42}),
            ("gadmm", {"alpha": 0.2}),
        ):
            _repro_run(
                problem,
                variant,
                500,
                [
                    out_dir / f"quadl1_{variant}_residual.csv",
                    out_dir / f"quadl1_{variant}_objective.csv",
                ],
                x0,
                **kwargs,
            )
        return 0
    raise UnknownExperiment(f"unknown experiment {args.name!r}; use counterexample or quadl1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="madmm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one solver on a JSON problem, write a CSV history")
    solve.add_argument("config")
    solve.add_argument("--variant", required=True, choices=["cyclic", "rp", "gadmm", "sadmm"])
    solve.add_argument("--beta", type=float, default=None, help="override the config penalty")
    solve.add_argument("--omega", type=float, default=None, help="sadmm dual step (default beta)")
    solve.add_argument("--alpha", type=float, default=0.2, help="gadmm correction factor")
    solve.add_argument("--seed", type=int, default=42)
    solve.add_argument("--iters", type=int, default=500)
    solve.add_argument("--tol", type=float, default=0.0)
    solve.add_argument("--out", required=True)
    solve.set_defaults(func=cmd_solve)

    spectra = sub.add_parser("spectra", help="spectral report of the one-step update operator")
    spectra.add_argument("config")
    spectra.add_argument("--variant", required=True, choices=["cyclic", "rp", "gadmm", "sadmm"])
    spectra.add_argument("--omega", type=float, default=None)
    spectra.add_argument("--alpha", type=float, default=0.2)
    spectra.add_argument("--deflate", action="store_true", help="deflate stationary dual-kernel directions")
    spectra.set_defaults(func=cmd_spectra)

    repro = sub.add_parser("repro", help="reproduce the benchmark experiments")
    repro.add_argument("name", help="counterexample or quadl1")
    repro.add_argument("--out-dir", required=True)
    repro.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    try:
        _setup_logging()
        args = build_parser().parse_args(argv)
        return args.func(args)
    except MadmmError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

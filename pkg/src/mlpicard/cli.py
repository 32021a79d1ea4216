"""Command-line surface: solve, study, verify, bounds.

Exit codes: 0 success (and, for verify, all checks passed), 1 runtime
failure (tree-size guard, unwritable output, failed checks), 2 usage
errors (argparse rejects unknown flags and bad choices).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from mlpicard import bounds, engine, model, schedule, study, verify
from mlpicard._kernel import backend
from mlpicard.stream import StreamKey


def _parse_base(text: str) -> tuple[str, int]:
    try:
        mode, raw = text.split(":", 1)
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError("expected raw:K or phi:K")
    if mode not in ("raw", "phi") or value < 1:
        raise argparse.ArgumentTypeError("expected raw:K or phi:K with K >= 1")
    return ("raw" if mode == "raw" else "scheduled", value)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers")


def _threads(args) -> int | None:
    # --threads flag, MLP_THREADS fallback, else machine parallelism.
    if args.threads is not None:
        return args.threads
    env = os.environ.get("MLP_THREADS", "")
    return int(env) if env else None


def _point(args, d: int) -> np.ndarray:
    if getattr(args, "x", None):
        x = np.asarray(args.x, dtype=np.float64)
        if x.shape != (d,):
            raise SystemExit2("--x length must equal --d")
        return x
    return np.zeros(d)


class SystemExit2(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlp",
        description="Full-history recursive multilevel Picard solver and bound toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_problem_flags(p, need_params=True):
        p.add_argument("--problem", required=True, choices=model.BUILTIN_NAMES)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--T", type=float, default=1.0)
        p.add_argument("--form", choices=("terminal", "initial"), default="terminal")
        if need_params:
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--m", type=_parse_base, required=True,
                           metavar="raw:K|phi:K")
        p.add_argument("--p", dest="p_hat", type=float, default=2.0)
        p.add_argument("--t", type=float, default=0.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None)

    solve = sub.add_parser("solve", help="run the estimator at one configuration")
    add_problem_flags(solve)
    solve.add_argument("--x", type=_parse_floats, default=None)
    solve.add_argument("--reps", type=int, default=1)

    stud = sub.add_parser("study", help="convergence / complexity studies; CSV output")
    stud_sub = stud.add_subparsers(dest="study_kind", required=True)

    conv = stud_sub.add_parser("convergence")
    add_problem_flags(conv, need_params=False)
    conv.add_argument("--nmax", type=int, required=True)
    conv.add_argument("--base-mode", choices=("scheduled", "raw"), default="scheduled")
    conv.add_argument("--reps", type=int, default=100)
    conv.add_argument("--out", default=None)

    comp = stud_sub.add_parser("complexity")
    add_problem_flags(comp, need_params=False)
    comp.add_argument("--eps", type=_parse_floats, required=True)
    comp.add_argument("--delta", type=float, default=0.5)
    comp.add_argument("--reps", type=int, default=100)
    comp.add_argument("--out", default=None)

    ver = sub.add_parser("verify", help="run oracle suites; exit 0 iff all pass")
    ver.add_argument("--suite", required=True, choices=verify.SUITES + ("all",))

    bnd = sub.add_parser("bounds", help="print the error-bound report for a configuration")
    add_problem_flags(bnd)
    bnd.add_argument("--x-norm", type=float, default=0.0)
    bnd.add_argument("--out", default=None)

    return parser


def run_solve(args) -> int:
    problem = model.builtin(args.problem, d=args.d, T=args.T, form=args.form)
    mode, m = args.m
    params = engine.MlpParams(n=args.n, m=m, base_mode=mode, p_hat=args.p_hat)
    x = _point(args, args.d)
    try:
        if args.reps == 1:
            realization = engine.estimate(problem, params, args.t, x,
                                          StreamKey(args.seed, ()))
            values = [realization.value]
            ledger = realization.ledger
        else:
            rs = engine.replicate(problem, params, args.t, x, args.reps,
                                  args.seed, _threads(args))
            values = [r.value for r in rs]
            ledger = rs[0].ledger
    except engine.EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    mean = float(np.mean(values))
    print(f"backend {backend()}")
    print(f"value {mean!r}" if args.reps == 1 else f"mean {mean!r} over {args.reps} reps")
    if problem.has_reference():
        ref = model.reference_value(problem, args.t, x)
        err = study.empirical_lp_error(values, ref, args.p_hat)
        print(f"reference {ref!r}")
        print(f"empirical_l{args.p_hat:g} {err!r}")
    print(
        "ledger f={0.f_evals} g={0.g_evals} uniform={0.uniform_draws} "
        "gaussian={0.gaussian_scalar_draws} total={0.total}".format(ledger)
    )
    inputs = bounds.bound_inputs_for_problem(
        problem, params.n, params.effective_base, params.p_hat,
        model.euclidean_norm(x),
    )
    sharp, relaxed = bounds.mlp_error_bound(inputs)
    print(f"bound_sharp {sharp!r}")
    print(f"bound_relaxed {relaxed!r}")
    return 0


def _emit_rows(rows, out_path, extra_lines=()) -> int:
    if out_path is None:
        study.write_csv(rows, sys.stdout)
        for line in extra_lines:
            print(line)
        return 0
    try:
        with open(out_path, "w") as fh:
            study.write_csv(rows, fh)
            for line in extra_lines:
                fh.write(line + "\n")
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
        return 1
    return 0


def run_study(args) -> int:
    problem = model.builtin(args.problem, d=args.d, T=args.T, form=args.form)
    try:
        if args.study_kind == "convergence":
            rows = study.convergence_study(
                problem, list(range(1, args.nmax + 1)), args.base_mode,
                args.p_hat, args.reps, args.seed, t=args.t, threads=_threads(args),
            )
            return _emit_rows(rows, args.out)
        rows, slope = study.complexity_study(
            problem, args.eps, args.delta, args.p_hat, args.seed,
            reps=args.reps, t=args.t, threads=_threads(args),
        )
        return _emit_rows(rows, args.out, [f"# fitted_cost_slope {slope!r}"])
    except (engine.EngineError, schedule.ScheduleError, study.StudyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run_verify(args) -> int:
    results = verify.run_suite(args.suite)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        detail = f"  ({r.detail})" if r.detail and not r.passed else ""
        print(f"[{status}] {r.suite}:{r.name}{detail}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


def run_bounds(args) -> int:
    problem = model.builtin(args.problem, d=args.d, T=args.T, form=args.form)
    mode, m = args.m
    params = engine.MlpParams(n=args.n, m=m, base_mode=mode, p_hat=args.p_hat)
    inputs = bounds.bound_inputs_for_problem(
        problem, params.n, params.effective_base, params.p_hat, args.x_norm
    )
    report = bounds.bound_report(inputs)
    lines = [("problem", problem.name)] + report.lines()
    width = max(len(k) for k, _ in lines)
    for k, v in lines:
        print(f"{k:<{width}}  {v}")
    if args.out is not None:
        try:
            with open(args.out, "w") as fh:
                fh.write(",".join(k for k, _ in lines) + "\n")
                fh.write(",".join(str(v) for _, v in lines) + "\n")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return run_solve(args)
        if args.command == "study":
            return run_study(args)
        if args.command == "verify":
            return run_verify(args)
        if args.command == "bounds":
            return run_bounds(args)
    except SystemExit2 as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())

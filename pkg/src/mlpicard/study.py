"""Experiment harness: empirical L^p errors, convergence and complexity studies.

CSV rows are written with shortest round-trip decimal formatting, so two
runs with identical seeds are byte-identical apart from the wall_ms column.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from mlpicard import bounds, engine, model, schedule

CSV_COLUMNS = (
    "problem,d,T,form,n,base_mode,base,p_hat,reps,t,empirical_lp,"
    "bound_relaxed,bound_sharp,cost_f,cost_g,cost_uniform,cost_gaussian,"
    "cost_total,wall_ms"
)


class StudyError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorReport:
    reps: int
    p_hat: float
    empirical_lp: float
    reference: float
    bound_relaxed: float
    bound_sharp: float
    passed: bool
    ledger: engine.CostLedger
    wall_ms: float


@dataclass(frozen=True)
class StudyRow:
    problem: str
    d: int
    T: float
    form: str
    n: int
    base_mode: str
    base: int
    p_hat: float
    reps: int
    t: float
    empirical_lp: float
    bound_relaxed: float
    bound_sharp: float
    cost_f: int
    cost_g: int
    cost_uniform: int
    cost_gaussian: int
    cost_total: int
    wall_ms: float

    def to_csv(self) -> str:
        fields = (
            self.problem, self.d, repr(float(self.T)), self.form, self.n,
            self.base_mode, self.base, repr(float(self.p_hat)), self.reps,
            repr(float(self.t)), repr(float(self.empirical_lp)),
            repr(float(self.bound_relaxed)), repr(float(self.bound_sharp)),
            self.cost_f, self.cost_g, self.cost_uniform, self.cost_gaussian,
            self.cost_total, repr(float(self.wall_ms)),
        )
        return ",".join(str(v) for v in fields)


def empirical_lp_error(values: Sequence[float], reference: float, p_hat: float) -> float:
    """(mean of |v - reference|**p_hat)**(1/p_hat), compensated summation."""
    if len(values) == 0:
        raise StudyError("empty sample")
    if p_hat < 1:
        raise StudyError("order below 1")
    total = math.fsum(abs(v - reference) ** p_hat for v in values)
    return (total / len(values)) ** (1.0 / p_hat)


def _measure(
    problem: model.ProblemSpec,
    params: engine.MlpParams,
    t: float,
    x,
    reps: int,
    root_seed: int,
    threads: int | None,
) -> ErrorReport:
    start = time.perf_counter()
    realizations = engine.replicate(problem, params, t, x, reps, root_seed, threads)
    wall_ms = (time.perf_counter() - start) * 1e3
    ref = model.reference_value(problem, t, x)
    err = empirical_lp_error([r.value for r in realizations], ref, params.p_hat)
    inputs = bounds.bound_inputs_for_problem(
        problem, params.n, params.effective_base, params.p_hat,
        model.euclidean_norm(x),
    )
    sharp, relaxed = bounds.mlp_error_bound(inputs)
    return ErrorReport(
        reps=reps, p_hat=params.p_hat, empirical_lp=err, reference=ref,
        bound_relaxed=relaxed, bound_sharp=sharp, passed=err <= relaxed,
        ledger=realizations[0].ledger, wall_ms=wall_ms,
    )


def _row(problem, params, t, report) -> StudyRow:
    return StudyRow(
        problem=problem.name, d=problem.d, T=problem.T, form=problem.form,
        n=params.n, base_mode=params.base_mode, base=params.effective_base,
        p_hat=params.p_hat, reps=report.reps, t=t,
        empirical_lp=report.empirical_lp, bound_relaxed=report.bound_relaxed,
        bound_sharp=report.bound_sharp,
        cost_f=report.ledger.f_evals, cost_g=report.ledger.g_evals,
        cost_uniform=report.ledger.uniform_draws,
        cost_gaussian=report.ledger.gaussian_scalar_draws,
        cost_total=report.ledger.total, wall_ms=report.wall_ms,
    )


def convergence_study(
    problem: model.ProblemSpec,
    n_list: Sequence[int],
    base_mode: str,
    p_hat: float,
    reps: int,
    root_seed: int,
    t: float = 0.0,
    x=None,
    threads: int | None = None,
) -> list[StudyRow]:
    """One row per n along the diagonal m = n (the U_{n,n} estimator family)."""
    if x is None:
        x = np.zeros(problem.d)
    rows = []
    for n in n_list:
        params = engine.MlpParams(n=n, m=n, base_mode=base_mode, p_hat=p_hat)
        report = _measure(problem, params, t, x, reps, root_seed, threads)
        rows.append(_row(problem, params, t, report))
    return rows


def complexity_query_for(
    problem: model.ProblemSpec, eps: float, delta: float, p_hat: float, n_cap: int = 64
) -> schedule.ComplexityQuery:
    """Selector inputs from a problem instance; L is the nonlinearity's
    Lipschitz constant and the growth exponents come from the problem."""
    return schedule.ComplexityQuery(
        d=problem.d, eps=eps, delta=delta, p_hat=p_hat,
        L=problem.L, growth_p=0.0, growth_q=problem.growth_q, T=problem.T,
        n_cap=n_cap,
    )


def complexity_study(
    problem: model.ProblemSpec,
    eps_list: Sequence[float],
    delta: float,
    p_hat: float,
    root_seed: int,
    reps: int = 100,
    t: float = 0.0,
    x=None,
    threads: int | None = None,
    n_cap: int = 64,
) -> tuple[list[StudyRow], float]:
    """Rows for each accuracy eps (descending) plus the fitted slope of
    log cost against log(1/eps)."""
    eps_arr = [float(e) for e in eps_list]
    if not eps_arr or any(e <= 0 for e in eps_arr):
        raise StudyError("eps values must be positive")
    if len(eps_arr) > 1 and not all(b < a for a, b in zip(eps_arr, eps_arr[1:])):
        raise StudyError("eps values must be strictly descending")
    if x is None:
        x = np.zeros(problem.d)
    rows = []
    for eps in eps_arr:
        query = complexity_query_for(problem, eps, delta, p_hat, n_cap)
        n = schedule.choose_n(query)
        params = engine.MlpParams(n=n, m=n, base_mode="scheduled", p_hat=p_hat)
        report = _measure(problem, params, t, x, reps, root_seed, threads)
        rows.append(_row(problem, params, t, report))
    slope = fitted_cost_slope(eps_arr, [r.cost_total for r in rows])
    return rows, slope


def fitted_cost_slope(eps_list: Sequence[float], costs: Sequence[int]) -> float:
    """Least-squares slope of log(cost) vs log(1/eps)."""
    xs = np.log(1.0 / np.asarray(eps_list, dtype=np.float64))
    ys = np.log(np.asarray(costs, dtype=np.float64))
    if len(xs) < 2 or np.allclose(xs, xs[0]):
        return 0.0
    return float(np.polyfit(xs, ys, 1)[0])


def write_csv(rows: Sequence[StudyRow], fh: TextIO) -> None:
    fh.write(CSV_COLUMNS + "\n")
    for row in rows:
        fh.write(row.to_csv() + "\n")

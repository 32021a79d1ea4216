"""Acceptance criteria, one test per criterion, each printing a PASS line.

Tolerances are pinned here and nowhere else.  Run with `pytest -v
tests/test_acceptance.py` or via `mlp verify --suite all` for the
suite-level subset.
"""

import io
import math
import subprocess
import sys

import numpy as np
import pytest

from mlpicard import bounds, schedule, study
from mlpicard.engine import MlpParams, estimate, predicted_cost
from mlpicard.model import builtin, problem_spec
from mlpicard.stream import StreamKey
from mlpicard.verify import rademacher_lp_mean


def _report(num: int, name: str) -> None:
    print(f"ACCEPTANCE {num} ({name}): PASS")


def test_acceptance_1_exactness():
    for d in (1, 5, 20):
        p = builtin("constant-source", d=d, T=1.0)
        for n in (1, 2, 3):
            for params in (
                MlpParams(n=n, m=2, base_mode="raw"),
                MlpParams(n=n, m=3, base_mode="scheduled"),
            ):
                for rep in range(3):
                    r = estimate(p, params, 0.0, np.zeros(d), StreamKey(17, (rep,)))
                    assert abs(r.value - 1.0) <= 1e-12

    c = 2.75
    flat = problem_spec("flat", d=5, T=1.0, f=None, g=lambda x: c, L=0.0, frak_L=c)
    r = estimate(flat, MlpParams(n=2, m=2, base_mode="raw"), 0.3, np.zeros(5),
                 StreamKey(1, ()))
    assert abs(r.value - c) <= 1e-12

    hq = builtin("heat-quadratic", d=5, T=1.0)
    x = np.linspace(-1.0, 1.0, 5)
    r = estimate(hq, MlpParams(n=2, m=2, base_mode="raw"), 1.0, x, StreamKey(2, ()))
    assert r.value == pytest.approx(hq.g(x), rel=1e-12)
    _report(1, "telescoping exactness")


def test_acceptance_2_cost_identity():
    problems = {d: builtin("linear-reaction", d=d, T=1.0) for d in (1, 5)}
    for d, p in problems.items():
        for base in (1, 2, 3):
            for n in range(6):
                pred = predicted_cost(n, base, d)
                r = estimate(p, MlpParams(n=n, m=base, base_mode="raw"), 0.5,
                             np.zeros(d), StreamKey(23, (n, base, d)))
                assert r.ledger == pred
                rec, closed = bounds.cost_recursion_bound(n, base, float(d + 2))
                assert pred.total <= rec * (1 + 1e-12)
                assert rec <= closed * (1 + 1e-12)
    _report(2, "ledger identity and cost domination")


def test_acceptance_3_mc_lp_bound():
    for p in (2.0, 3.0, 4.0):
        for n in range(1, 13):
            enum = rademacher_lp_mean(n, p)
            bound = bounds.mc_lp_bound(p, n, 1.0, centered=True)
            assert bound - enum >= -1e-12
    for n in range(1, 13):
        gap = abs(rademacher_lp_mean(n, 2.0) - bounds.mc_lp_bound(2.0, n, 1.0, centered=True))
        assert gap <= 1e-12
    _report(3, "Monte Carlo L^p bound by enumeration")


def test_acceptance_4_recursion_closed_forms():
    rng = np.random.default_rng(97)
    done = 0
    while done < 100:
        b1 = complex(rng.normal(), rng.normal()) * 0.6
        b2 = complex(rng.normal(), rng.normal()) * 0.6
        if abs(b1 * b1 + 4.0 * b2) <= 1e-6:
            continue
        done += 1
        alphas = tuple(complex(a, b) for a, b in rng.normal(size=(6, 2)))
        direct = bounds.two_step_direct_recursion(b1, b2, alphas, 30)
        for k in (0, 9, 30):
            closed = bounds.two_step_closed_form(b1, b2, alphas, k)
            assert abs(closed - direct[k]) <= 1e-8 * max(1.0, abs(direct[k]))

    for _ in range(50):
        gamma = int(rng.integers(0, 2))
        beta = float(rng.uniform(0.2, 1.6))
        alphas = tuple(complex(a, b) for a, b in rng.normal(size=(5, 2)))
        direct = bounds.full_history_direct_recursion(gamma, beta, alphas, 20)
        for k in (0, 7, 20):
            closed = bounds.full_history_closed_form(gamma, beta, alphas, k)
            assert abs(closed - direct[k]) <= 1e-8 * max(1.0, abs(direct[k]))

    for gamma in (0, 1):
        for beta in (1.0, 1.5, 2.0):
            xs = bounds.full_history_equality_recursion(gamma, beta, 1.0, 1.0, 20)
            for k in range(21):
                assert xs[k] <= bounds.full_history_upper_bound(gamma, beta, 1.0, 1.0, k) * (1 + 1e-12)
    xs = bounds.full_history_equality_recursion(1, 1.0, 1.0, 1.0, 2)
    assert xs[2] == 5.0
    assert xs[2] <= 2.0 * 9.0 / math.sqrt(5.0)
    _report(4, "recursion closed forms and bound domination")


def test_acceptance_5_analytic_chains():
    for n in range(1, 31):
        c = bounds.stirling_chain(n)
        assert c.log_lower <= c.log_factorial + 1e-12
        assert c.log_factorial <= c.log_upper + 1e-12

    for m in range(1, 401):
        rep = bounds.talk1_chain(float(m), 60)
        assert rep.passed, f"talk1 fails at m={m}"

    report = schedule.check_phi_properties(10**5)
    assert report.doubling_ok and report.nondecreasing_ok
    ratios = [schedule.phi(10**k) ** 3 / 10**k for k in (4, 5, 6, 7)]
    assert ratios[0] == pytest.approx(0.8, abs=1e-12)
    assert ratios[-1] == pytest.approx(0.0166375, abs=1e-7)
    assert all(a > b for a, b in zip(ratios, ratios[1:]))
    _report(5, "factorial/talk1/phi chains")


def test_acceptance_6_gronwall_oracles():
    grid = np.linspace(0.0, 1.0, 256)
    for gamma in (0.5, 1.0, 2.0):
        for beta_fn in (lambda s: 1.0, lambda s: 2.0 - s):
            alpha = bounds.gronwall_equality_solution(beta_fn, gamma, 1.0, grid)
            for t, a in zip(grid, alpha):
                bd = bounds.gronwall_backward_bound(beta_fn, gamma, 1.0, float(t))
                assert a <= bd * (1.0 + 1e-3)

    for M, N, p in ((2, 2, 2.0), (4, 3, 2.0), (9, 5, 2.0), (4, 4, 3.0)):
        g = bounds.GronwallInputs(a=1.0, b=1.0, M=M, N=N, p=p, T=1.0, tau=0.0, sup_f0=1.0)
        sharp, relaxed = bounds.fn_gron_bound(g)
        assert sharp <= relaxed * (1 + 1e-12)
        fn = bounds.fn_gron_equality_case(g, nodes=256)
        assert fn <= sharp * (1.0 + 1e-3)
    _report(6, "Gronwall equality-case oracles")


def test_acceptance_7_end_to_end_error_vs_bound():
    configs = (
        builtin("heat-quadratic", d=10, T=1.0),
        builtin("flat-ode", d=20, T=1.0, c=1.0),
    )
    for problem in configs:
        rows = study.convergence_study(
            problem, [2, 3, 4, 5], "scheduled", 2.0, reps=500, root_seed=424242,
        )
        for row in rows:
            assert row.empirical_lp <= row.bound_relaxed, (
                f"{problem.name} n={row.n}: {row.empirical_lp} > {row.bound_relaxed}"
            )
        errs = {row.n: row.empirical_lp for row in rows}
        assert errs[5] < errs[2], f"{problem.name}: {errs}"
    _report(7, "empirical L2 error below relaxed bound, decreasing along diagonal")


def test_acceptance_8_complexity_trend():
    problem = builtin("heat-quadratic", d=5, T=1.0)
    eps_list = [0.5 * 20, 0.25 * 20, 0.125 * 20]
    rows, slope = study.complexity_study(
        problem, eps_list, delta=0.5, p_hat=2.0, root_seed=7, reps=100,
    )
    ns = [row.n for row in rows]
    assert ns == sorted(ns), f"choose_n not nondecreasing: {ns}"
    costs = [row.cost_total for row in rows]
    assert all(b >= a for a, b in zip(costs, costs[1:])), f"cost not nondecreasing: {costs}"
    assert slope <= 4.0, f"fitted slope {slope} exceeds desk-scale ceiling"
    _report(8, "complexity trend witness")


def _strip_wall_ms(text: str) -> str:
    return "\n".join(",".join(line.split(",")[:-1]) for line in text.strip().split("\n"))


def test_acceptance_9_determinism():
    verify_runs = [
        subprocess.run(
            [sys.executable, "-m", "mlpicard.cli", "verify", "--suite", "all"],
            capture_output=True, text=True, timeout=600,
        )
        for _ in range(2)
    ]
    assert verify_runs[0].returncode == 0
    assert verify_runs[0].stdout == verify_runs[1].stdout

    def csv_run() -> str:
        rows = study.convergence_study(
            builtin("heat-quadratic", d=4, T=1.0), [1, 2, 3], "scheduled", 2.0,
            reps=50, root_seed=31,
        )
        buf = io.StringIO()
        study.write_csv(rows, buf)
        return buf.getvalue()

    assert _strip_wall_ms(csv_run()) == _strip_wall_ms(csv_run())
    _report(9, "byte-identical reruns")

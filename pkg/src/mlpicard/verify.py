"""Oracle suites behind `mlp verify`.

Each suite checks one family of identities or inequalities against an
independent oracle: exhaustive enumeration, direct recursion, equality-case
grids, exact factorials, or closed-form exactness of the estimator itself.
All suites are deterministic (fixed seeds).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mlpicard import bounds, engine, model, schedule

SUITES = (
    "mc", "recursions", "stirling", "talk1", "phi", "gronwall", "cost", "exactness",
)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _check(suite: str, name: str, passed: bool, detail: str = "") -> CheckResult:
    return CheckResult(suite, name, bool(passed), detail)


def rademacher_lp_mean(n: int, p: float) -> float:
    """(E |mean of n Rademacher signs|^p)^(1/p) by exhaustive enumeration."""
    total = 0.0
    for k in range(n + 1):
        mean = (n - 2 * k) / n
        total += math.comb(n, k) * abs(mean) ** p
    return (total / 2.0**n) ** (1.0 / p)


def suite_mc() -> list[CheckResult]:
    out = []
    worst = math.inf
    for p in (2.0, 3.0, 4.0):
        for n in range(1, 13):
            enum = rademacher_lp_mean(n, p)
            bound = bounds.mc_lp_bound(p, n, 1.0, centered=True)
            worst = min(worst, bound - enum)
    out.append(_check("mc", "rademacher_enumeration_dominated", worst >= -1e-12,
                      f"min slack {worst:.3e}"))
    eq_gap = max(
        abs(rademacher_lp_mean(n, 2.0) - bounds.mc_lp_bound(2.0, n, 1.0, centered=True))
        for n in range(1, 13)
    )
    out.append(_check("mc", "p2_equality", eq_gap <= 1e-12, f"max gap {eq_gap:.3e}"))
    uncentered_ok = all(
        rademacher_lp_mean(n, p) <= bounds.mc_lp_bound(p, n, 1.0, centered=False) + 1e-12
        for p in (2.0, 3.0, 4.0) for n in range(1, 13)
    )
    out.append(_check("mc", "uncentered_dominates", uncentered_ok))
    return out


def suite_recursions() -> list[CheckResult]:
    rng = np.random.default_rng(20240511)
    out = []

    worst = 0.0
    trials = 0
    while trials < 100:
        b1 = complex(rng.normal(), rng.normal()) * 0.6
        b2 = complex(rng.normal(), rng.normal()) * 0.6
        if abs(b1 * b1 + 4.0 * b2) <= 1e-6:
            continue
        trials += 1
        alphas = tuple(complex(a, b) for a, b in rng.normal(size=(6, 2)))
        direct = bounds.two_step_direct_recursion(b1, b2, alphas, 30)
        for k in (5, 17, 30):
            closed = bounds.two_step_closed_form(b1, b2, alphas, k)
            rel = abs(closed - direct[k]) / max(1.0, abs(direct[k]))
            worst = max(worst, rel)
    out.append(_check("recursions", "two_step_closed_form_matches", worst <= 1e-8,
                      f"max rel err {worst:.3e}"))

    worst = 0.0
    for _ in range(50):
        gamma = int(rng.integers(0, 2))
        beta = float(rng.uniform(0.2, 1.5))
        alphas = tuple(complex(a, b) for a, b in rng.normal(size=(5, 2)))
        direct = bounds.full_history_direct_recursion(gamma, beta, alphas, 20)
        for k in (3, 11, 20):
            closed = bounds.full_history_closed_form(gamma, beta, alphas, k)
            rel = abs(closed - direct[k]) / max(1.0, abs(direct[k]))
            worst = max(worst, rel)
    out.append(_check("recursions", "full_history_closed_form_matches", worst <= 1e-8,
                      f"max rel err {worst:.3e}"))

    # The closed bound is checked on alpha1 <= alpha0 instances (the cost
    # analysis consumes it with alpha0 = alpha1); for gamma = 0 it does not
    # cover alpha1 > alpha0.
    dominated = True
    for gamma in (0, 1):
        for beta in (1.0, 1.5, 2.0):
            for a0, a1 in ((1.0, 1.0), (2.0, 0.5), (0.3, 0.3)):
                xs = bounds.full_history_equality_recursion(gamma, beta, a0, a1, 20)
                for k in range(21):
                    ub = bounds.full_history_upper_bound(gamma, beta, a0, a1, k)
                    if xs[k] > ub * (1.0 + 1e-12):
                        dominated = False
    out.append(_check("recursions", "full_history_bound_dominates_equality_case", dominated))

    xs = bounds.full_history_equality_recursion(1, 1.0, 1.0, 1.0, 2)
    hand_ok = xs == [0.0, 2.0, 5.0] and xs[2] <= bounds.full_history_upper_bound(1, 1.0, 1.0, 1.0, 2)
    out.append(_check("recursions", "hand_value_x2_eq_5", hand_ok,
                      f"x = {xs}, bound {bounds.full_history_upper_bound(1, 1.0, 1.0, 1.0, 2):.4f}"))
    return out


def suite_stirling() -> list[CheckResult]:
    ok = True
    worst = math.inf
    for n in range(1, 31):
        chain = bounds.stirling_chain(n)
        lo_slack = chain.log_factorial - chain.log_lower
        hi_slack = chain.log_upper - chain.log_factorial
        worst = min(worst, lo_slack, hi_slack)
        if lo_slack < -1e-12 or hi_slack < -1e-12:
            ok = False
    n1 = bounds.stirling_chain(1)
    equality = abs(n1.upper - 1.0) <= 1e-15 and abs(n1.lower - 2**-0.5) <= 1e-15
    return [
        _check("stirling", "chain_n_le_30", ok, f"min log slack {worst:.3e}"),
        _check("stirling", "n1_upper_equality", equality),
    ]


def suite_talk1() -> list[CheckResult]:
    ok = True
    for m in range(1, 401):
        rep = bounds.talk1_chain(float(m), n_scan=60)
        if not rep.passed:
            ok = False
            break
    return [_check("talk1", "chain_m_1_to_400", ok)]


def suite_phi() -> list[CheckResult]:
    out = []
    rep = schedule.check_phi_properties(100_000)
    out.append(_check("phi", "doubling_le_1e5", rep.doubling_ok))
    out.append(_check("phi", "nondecreasing", rep.nondecreasing_ok))
    out.append(_check("phi", "cubed_ratio_decreasing", rep.ratios_decreasing,
                      str(rep.decade_ratios)))
    frozen = {1: 1, 2: 2, 5: 3, 100: 8, 10**4: 20, 10**6: 41, 10**7: 55}
    vals_ok = all(schedule.phi(m) == v for m, v in frozen.items())
    out.append(_check("phi", "frozen_values", vals_ok))
    ratio_ok = True
    for p_hat in (2.0, 3.0, 4.0, 6.0):
        ratios = [schedule.phi(10**k) ** (p_hat / 2.0) / 10**k for k in range(3, 8)]
        if not all(a > b for a, b in zip(ratios[-3:], ratios[-2:])):
            ratio_ok = False
    out.append(_check("phi", "p_ratio_decreasing_tail", ratio_ok))
    return out


def suite_gronwall() -> list[CheckResult]:
    out = []
    worst = 0.0
    for gamma in (0.5, 1.0, 2.0):
        for beta_fn in (lambda s: 1.0, lambda s: 2.0 - s):
            T = 1.0
            grid = np.linspace(0.0, T, 256)
            alpha = bounds.gronwall_equality_solution(beta_fn, gamma, T, grid)
            for tj, aj in zip(grid, alpha):
                bd = bounds.gronwall_backward_bound(beta_fn, gamma, T, float(tj))
                worst = max(worst, aj / bd)
    out.append(_check("gronwall", "backward_equality_case_256", worst <= 1.0 + 1e-3,
                      f"max ratio {worst:.8f}"))

    worst = 0.0
    order_ok = True
    for M in (2, 4, 9):
        for N in (2, 3, 5):
            for p in (2.0, 3.0):
                g = bounds.GronwallInputs(a=1.0, b=1.0, M=M, N=N, p=p, T=1.0, tau=0.0, sup_f0=1.0)
                sharp, relaxed = bounds.fn_gron_bound(g)
                if sharp > relaxed * (1.0 + 1e-12):
                    order_ok = False
                fn = bounds.fn_gron_equality_case(g, nodes=256)
                worst = max(worst, fn / sharp)
    out.append(_check("gronwall", "fn_gron_equality_case_256", worst <= 1.0 + 1e-3,
                      f"max ratio {worst:.8f}"))

    for M in range(1, 11):
        for N in range(1, 11):
            for p in (2.0, 3.0, 4.0):
                g = bounds.GronwallInputs(a=1.0, b=0.5, M=M, N=N, p=p, T=1.0, tau=0.0, sup_f0=1.0)
                sharp, relaxed = bounds.fn_gron_bound(g)
                if sharp > relaxed * (1.0 + 1e-12):
                    order_ok = False
    out.append(_check("gronwall", "fn_gron_sharp_le_relaxed_grid", order_ok))
    return out


def suite_cost() -> list[CheckResult]:
    out = []
    identity_ok = True
    domination_ok = True
    for d in (1, 5):
        problem = model.builtin("constant-source", d=d, T=1.0)
        for base in (1, 2, 3):
            for n in range(0, 6):
                pred = engine.predicted_cost(n, base, d)
                params = engine.MlpParams(n=n, m=base, base_mode="raw")
                real = engine.estimate(problem, params, 0.25, np.zeros(d),
                                       key=_key(seed=7, path=(n, base, d)))
                if real.ledger != pred:
                    identity_ok = False
                rec, closed = bounds.cost_recursion_bound(n, base, float(d + 2))
                if not (pred.total <= rec * (1 + 1e-12) <= closed * (1 + 1e-12)):
                    domination_ok = False
    out.append(_check("cost", "instrumented_equals_predicted", identity_ok))
    out.append(_check("cost", "predicted_le_recursion_le_closed", domination_ok))

    pred = engine.predicted_cost(1, 3, 2)
    hand_ok = (pred.f_evals, pred.g_evals, pred.uniform_draws,
               pred.gaussian_scalar_draws, pred.total) == (3, 3, 3, 12, 21)
    out.append(_check("cost", "hand_count_n1_base3_d2", hand_ok, str(pred)))
    return out


def _key(seed: int, path=()):
    from mlpicard.stream import StreamKey

    return StreamKey(seed, path)


def suite_exactness() -> list[CheckResult]:
    out = []
    worst = 0.0
    for d in (1, 5, 20):
        problem = model.builtin("constant-source", d=d, T=1.0)
        for n in (1, 2, 3):
            for params in (
                engine.MlpParams(n=n, m=2, base_mode="raw"),
                engine.MlpParams(n=n, m=3, base_mode="scheduled"),
            ):
                for rep in range(3):
                    r = engine.estimate(problem, params, 0.0, np.zeros(d), _key(11, (rep,)))
                    worst = max(worst, abs(r.value - 1.0))
    out.append(_check("exactness", "constant_source_value_1", worst <= 1e-12,
                      f"max |value-1| = {worst:.3e}"))

    worst = 0.0
    for d in (1, 4):
        c = 2.5
        problem = model.problem_spec(
            "flat-datum", d=d, T=1.0, f=None, g=lambda x, _c=c: _c,
            L=0.0, frak_L=c,
        )
        for n in (1, 2):
            r = engine.estimate(problem, engine.MlpParams(n=n, m=2, base_mode="raw"),
                                0.3, np.zeros(d), _key(3, ()))
            worst = max(worst, abs(r.value - c))
    out.append(_check("exactness", "zero_f_returns_datum", worst <= 1e-12,
                      f"max |value-c| = {worst:.3e}"))

    worst = 0.0
    rng = np.random.default_rng(5)
    for d in (2, 7):
        problem = model.builtin("heat-quadratic", d=d, T=1.0)
        x = rng.normal(size=d)
        gx = problem.g(x)
        for n in (1, 3):
            r = engine.estimate(problem, engine.MlpParams(n=n, m=2, base_mode="raw"),
                                1.0, x, _key(13, ()))
            worst = max(worst, abs(r.value - gx) / max(1.0, abs(gx)))
    out.append(_check("exactness", "terminal_time_returns_datum", worst <= 1e-12,
                      f"max rel dev = {worst:.3e}"))

    # Linearity in the datum under a fixed key; exact for power-of-two scale.
    lam = 4.0
    d = 3
    base_g = lambda x: float(np.dot(x, x))
    pr1 = model.problem_spec("lin-1", d=d, T=1.0, f=None, g=base_g, L=0.0,
                             frak_L=1.0, growth_p=2.0, growth_q=2.0)
    pr2 = model.problem_spec("lin-2", d=d, T=1.0, f=None,
                             g=lambda x: lam * base_g(x), L=0.0,
                             frak_L=lam, growth_p=2.0, growth_q=2.0)
    params = engine.MlpParams(n=2, m=3, base_mode="raw")
    x = np.ones(d)
    v1 = engine.estimate(pr1, params, 0.25, x, _key(21, ())).value
    v2 = engine.estimate(pr2, params, 0.25, x, _key(21, ())).value
    out.append(_check("exactness", "datum_linearity_pow2_scale", v2 == lam * v1,
                      f"{v2} vs {lam * v1}"))
    return out


_SUITE_FUNCS = {
    "mc": suite_mc,
    "recursions": suite_recursions,
    "stirling": suite_stirling,
    "talk1": suite_talk1,
    "phi": suite_phi,
    "gronwall": suite_gronwall,
    "cost": suite_cost,
    "exactness": suite_exactness,
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        results = []
        for s in SUITES:
            results.extend(_SUITE_FUNCS[s]())
        return results
    if name not in _SUITE_FUNCS:
        raise KeyError(name)
    return _SUITE_FUNCS[name]()

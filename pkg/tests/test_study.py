import io

import numpy as np
import pytest

from mlpicard import engine
from mlpicard.model import builtin
from mlpicard.study import (
    CSV_COLUMNS,
    StudyError,
    complexity_study,
    convergence_study,
    empirical_lp_error,
    fitted_cost_slope,
    write_csv,
)


def test_empirical_lp_trivial_cases():
    assert empirical_lp_error([1.0, 1.0, 1.0], 1.0, 2.0) == 0.0
    assert empirical_lp_error([0.0, 2.0], 1.0, 2.0) == pytest.approx(1.0)
    assert empirical_lp_error([0.0, 2.0], 1.0, 4.0) == pytest.approx(1.0)


def test_empirical_lp_rejects_empty():
    with pytest.raises(StudyError):
        empirical_lp_error([], 0.0, 2.0)


def test_convergence_constant_source_is_exact():
    p = builtin("constant-source", d=2, T=1.0)
    rows = convergence_study(p, [1, 2, 3], "scheduled", 2.0, reps=10, root_seed=1)
    assert [r.n for r in rows] == [1, 2, 3]
    for row in rows:
        assert row.empirical_lp <= 1e-12
        assert row.empirical_lp <= row.bound_relaxed


def test_rows_carry_predicted_cost():
    p = builtin("heat-quadratic", d=3, T=1.0)
    rows = convergence_study(p, [1, 2, 3], "scheduled", 2.0, reps=5, root_seed=2)
    for row in rows:
        pred = engine.predicted_cost(row.n, row.base, p.d)
        assert (row.cost_f, row.cost_g, row.cost_uniform, row.cost_gaussian,
                row.cost_total) == (
            pred.f_evals, pred.g_evals, pred.uniform_draws,
            pred.gaussian_scalar_draws, pred.total,
        )


def test_convergence_error_decreases_heat_quadratic():
    p = builtin("heat-quadratic", d=10, T=1.0)
    rows = convergence_study(p, [2, 4], "scheduled", 2.0, reps=200, root_seed=3)
    assert rows[1].empirical_lp < rows[0].empirical_lp
    for row in rows:
        assert row.empirical_lp <= row.bound_relaxed


def strip_wall_ms(csv_text: str) -> str:
    lines = csv_text.strip().split("\n")
    return "\n".join("," .join(line.split(",")[:-1]) for line in lines)


def test_csv_determinism_excluding_wall_ms():
    p = builtin("heat-quadratic", d=4, T=1.0)

    def run():
        rows = convergence_study(p, [1, 2, 3], "scheduled", 2.0, reps=40, root_seed=5)
        buf = io.StringIO()
        write_csv(rows, buf)
        return buf.getvalue()

    assert strip_wall_ms(run()) == strip_wall_ms(run())


def test_csv_header_exact():
    assert CSV_COLUMNS == (
        "problem,d,T,form,n,base_mode,base,p_hat,reps,t,empirical_lp,"
        "bound_relaxed,bound_sharp,cost_f,cost_g,cost_uniform,cost_gaussian,"
        "cost_total,wall_ms"
    )
    p = builtin("constant-source", d=1, T=1.0)
    rows = convergence_study(p, [1], "raw", 2.0, reps=2, root_seed=0)
    buf = io.StringIO()
    write_csv(rows, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == CSV_COLUMNS
    assert len(lines) == 2
    assert len(lines[1].split(",")) == len(CSV_COLUMNS.split(","))


def test_csv_floats_roundtrip():
    p = builtin("heat-quadratic", d=2, T=1.0)
    rows = convergence_study(p, [2], "scheduled", 2.0, reps=7, root_seed=8)
    fields = rows[0].to_csv().split(",")
    emp = float(fields[CSV_COLUMNS.split(",").index("empirical_lp")])
    assert emp == rows[0].empirical_lp  # shortest round-trip repr


def test_complexity_study_rows_and_slope():
    p = builtin("heat-quadratic", d=5, T=1.0)
    rows, slope = complexity_study(p, [10.0, 5.0, 2.5], delta=0.5, p_hat=2.0,
                                   root_seed=1, reps=20)
    assert len(rows) == 3
    ns = [r.n for r in rows]
    assert ns == sorted(ns)
    costs = [r.cost_total for r in rows]
    assert all(b >= a for a, b in zip(costs, costs[1:]))
    assert np.isfinite(slope)


def test_complexity_study_trivial_eps():
    p = builtin("flat-ode", d=2, T=1.0)
    rows, _ = complexity_study(p, [1e9], delta=0.5, p_hat=2.0, root_seed=1, reps=5)
    assert rows[0].n == 1


def test_complexity_eps_validation():
    p = builtin("heat-quadratic", d=2, T=1.0)
    with pytest.raises(StudyError):
        complexity_study(p, [], delta=0.5, p_hat=2.0, root_seed=0)
    with pytest.raises(StudyError):
        complexity_study(p, [1.0, 2.0], delta=0.5, p_hat=2.0, root_seed=0)
    with pytest.raises(StudyError):
        complexity_study(p, [1.0, -1.0], delta=0.5, p_hat=2.0, root_seed=0)


def test_convergence_propagates_tree_guard():
    p = builtin("constant-source", d=1, T=1.0)
    with pytest.raises(engine.EngineError, match="tree too large"):
        convergence_study(p, [63], "raw", 2.0, reps=1, root_seed=0)


def test_fitted_cost_slope_linear_fit():
    # cost = (1/eps)^3 exactly -> slope 3.
    eps = [1.0, 0.5, 0.25]
    costs = [int((1.0 / e) ** 3 * 1000) for e in eps]
    assert fitted_cost_slope(eps, costs) == pytest.approx(3.0, abs=1e-3)

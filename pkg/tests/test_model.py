import math

import numpy as np
import pytest

from mlpicard import bounds, model
from mlpicard.model import ModelError, builtin, euclidean_norm, problem_spec, reference_value


def test_unknown_builtin_rejected():
    with pytest.raises(ModelError, match="unknown builtin"):
        builtin("nosuch", d=1, T=1.0)


def test_unexpected_kwargs_rejected():
    with pytest.raises(ModelError, match="unexpected arguments"):
        builtin("heat-quadratic", d=1, T=1.0, c=2.0)


def test_heat_quadratic_reference():
    p = builtin("heat-quadratic", d=10, T=1.0)
    assert reference_value(p, 0.0, np.zeros(10)) == pytest.approx(20.0, abs=1e-12)
    p2 = builtin("heat-quadratic", d=2, T=1.0)
    assert reference_value(p2, 1.0, np.array([1.0, 1.0])) == pytest.approx(2.0, abs=1e-12)


def test_constant_source_reference():
    p = builtin("constant-source", d=3, T=1.0)
    assert reference_value(p, 0.25, np.zeros(3)) == pytest.approx(0.75, abs=1e-15)


def test_flat_ode_frozen_oracle_values():
    # y' = -cos(y), y(T) = c, high-order adaptive integration, tol 1e-10.
    p = builtin("flat-ode", d=4, T=1.0)
    assert reference_value(p, 0.0, np.zeros(4)) == pytest.approx(1.355751357841476, abs=1e-10)
    assert reference_value(p, 1.0, np.zeros(4)) == pytest.approx(1.0, abs=1e-12)
    p0 = builtin("flat-ode", d=1, T=1.0, c=0.0)
    assert reference_value(p0, 0.0, np.zeros(1)) == pytest.approx(0.8657694832396, abs=1e-10)


def test_linear_reaction_reference_solves_terminal_ode():
    # x-independent part D(t) = u(t,0) satisfies D' = -2 d e^{a(T-t)} - a D.
    d, T, a = 3, 1.0, 0.8
    p = builtin("linear-reaction", d=d, T=T, a=a)
    ref = lambda t: reference_value(p, t, np.zeros(d))
    h = 1e-5
    for t in (0.1, 0.5, 0.9):
        lhs = (ref(t + h) - ref(t - h)) / (2 * h)
        rhs = -2.0 * d * math.exp(a * (T - t)) - a * ref(t)
        assert lhs == pytest.approx(rhs, rel=1e-6)
    assert ref(T) == pytest.approx(0.0, abs=1e-12)
    assert reference_value(p, T, np.ones(d)) == pytest.approx(float(d), rel=1e-12)


def test_reference_errors():
    p = problem_spec("bare", d=2, T=1.0, f=None, g=lambda x: 0.0, L=0.0, frak_L=1.0)
    with pytest.raises(ModelError, match="no reference available"):
        reference_value(p, 0.0, np.zeros(2))
    hq = builtin("heat-quadratic", d=2, T=1.0)
    with pytest.raises(ModelError, match="outside"):
        reference_value(hq, 2.0, np.zeros(2))
    with pytest.raises(ModelError, match="dimension mismatch"):
        reference_value(hq, 0.5, np.zeros(3))


def test_initial_form_reference_flip():
    term = builtin("heat-quadratic", d=4, T=1.0)
    init = builtin("heat-quadratic", d=4, T=1.0, form="initial")
    x = np.array([1.0, 0.0, -2.0, 0.5])
    for t in (0.0, 0.3, 1.0):
        assert reference_value(init, t, x) == pytest.approx(
            reference_value(term, 1.0 - t, x), rel=1e-14
        )
    # Forward-time heat flow grows from the datum.
    assert reference_value(init, 0.0, x) == pytest.approx(float(np.dot(x, x)), abs=1e-12)


@pytest.mark.parametrize("name", model.BUILTIN_NAMES)
def test_builtin_constants_validate(name):
    p = builtin(name, d=3, T=1.0)
    result = model.validate_problem(p, seed=1)
    assert result == {"lipschitz_ok": True, "growth_ok": True}


def _mc_fixed_point_gap(p, t, x, seed, n_g=10**5, nodes=64):
    """Monte Carlo check of u(t,x) = E g(x + s W_{T-t}) + int_t^T E f(...) ds.

    Returns (gap, tolerance); tolerance is 5 combined standard errors plus a
    trapezoid-refinement allowance (the quadrature bias dominates when f is
    deterministic along the flow and all variances vanish).
    """
    rng = np.random.default_rng(seed)
    sig = p.diffusion_scale
    T, d = p.T, p.d

    z = rng.standard_normal((n_g, d))
    ys = x[None, :] + sig * math.sqrt(T - t) * z
    g_samples = np.array([p.g(y) for y in ys])
    g_hat = g_samples.mean()
    var = g_samples.var(ddof=1) / n_g if n_g > 1 else 0.0

    def f_node_means(num_nodes, n_f):
        ss = np.linspace(t, T, num_nodes)
        means, variances = [], []
        for s in ss:
            zz = rng.standard_normal((n_f, d))
            yy = x[None, :] + sig * math.sqrt(s - t) * zz
            vals = np.array(
                [model.eval_f(p, s, y, reference_value(p, s, y)) for y in yy]
            )
            means.append(vals.mean())
            variances.append(vals.var(ddof=1) / n_f)
        h = (T - t) / (num_nodes - 1)
        w = np.full(num_nodes, h)
        w[0] = w[-1] = h / 2.0
        return float(np.dot(w, means)), float(np.dot(w**2, variances))

    n_f = max(2, n_g // nodes)
    integral, int_var = f_node_means(nodes, n_f)
    integral_fine, _ = f_node_means(2 * nodes, max(2, n_f // 2))
    quad_allowance = 3.0 * abs(integral - integral_fine) + 1e-9

    u = reference_value(p, t, x)
    gap = abs(u - (g_hat + integral))
    tol = 5.0 * math.sqrt(var + int_var) + quad_allowance
    return gap, tol


@pytest.mark.parametrize("name", model.BUILTIN_NAMES)
def test_fixed_point_equation_mc(name):
    p = builtin(name, d=3, T=1.0)
    rng = np.random.default_rng(7)
    for i in range(5):
        t = float(rng.uniform(0.0, 0.9))
        x = rng.normal(0.0, 1.0, p.d)
        gap, tol = _mc_fixed_point_gap(p, t, x, seed=100 + i, n_g=10**5)
        assert gap <= tol, f"{name}: gap {gap} > tol {tol} at t={t}"


@pytest.mark.parametrize("name", model.BUILTIN_NAMES)
def test_apriori_bound_dominates_reference(name):
    p = builtin(name, d=3, T=1.0)
    rng = np.random.default_rng(3)
    for _ in range(20):
        t = float(rng.uniform(0.0, 1.0))
        x = rng.normal(0.0, 2.0, p.d)
        inputs = bounds.bound_inputs_for_problem(p, n=1, base=1, p_hat=2.0,
                                                 x_norm=euclidean_norm(x))
        bound = bounds.apriori_solution_bound(inputs, t)
        assert abs(reference_value(p, t, x)) <= bound


def test_apriori_heat_quadratic_example():
    p = builtin("heat-quadratic", d=5, T=1.0)
    inputs = bounds.bound_inputs_for_problem(p, n=1, base=1, p_hat=2.0, x_norm=0.0)
    assert bounds.apriori_solution_bound(inputs, 0.0) >= 10.0


def test_norm_utility():
    assert euclidean_norm(np.array([3.0, 4.0])) == pytest.approx(5.0)
    assert euclidean_norm(np.zeros(7)) == 0.0

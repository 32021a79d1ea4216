"""Problem definitions and built-in benchmarks with exact or ODE references.

All built-ins are stated in terminal form (datum at time T) with the
sqrt(2)-scaled diffusion matching the target PDE
``du/dt + Laplace(u) + f(u) = 0``; the initial-condition form is reached by
the time reversal ``t -> T - t`` applied at the engine boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from mlpicard import _pykernel as _codes

SQRT2 = math.sqrt(2.0)

BUILTIN_NAMES = ("heat-quadratic", "constant-source", "flat-ode", "linear-reaction")


class ModelError(ValueError):
    pass


def euclidean_norm(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.sqrt(np.dot(x, x)))


@dataclass(frozen=True)
class ProblemSpec:
    """A semilinear heat problem in fixed-point form.

    ``f`` is the nonlinearity (value-only ``f(v)`` or full ``f(t, x, v)``
    per ``f_arity``), ``g`` the terminal or initial datum depending on
    ``form``.  ``growth_p`` bounds ``max(|f(t,x,0)|, |g(x)|) <=
    frak_L * (1 + ||x||**growth_p)`` and ``growth_q`` is the matching
    l1-convention exponent used by the complexity constants.  The kernel
    dispatch codes (fcode/gcode and their parameters) mirror f and g for
    the compiled hot path; callbacks are the fallback codes.
    """

    name: str
    d: int
    T: float
    f: Callable
    g: Callable
    L: float
    frak_L: float
    growth_p: float = 0.0
    growth_q: float = 0.0
    diffusion_scale: float = SQRT2
    form: str = "terminal"
    reference: Callable | None = None
    f_arity: str = "value"
    fcode: int = _codes.F_PYVALUE
    fa: float = 0.0
    fb: float = 0.0
    gcode: int = _codes.G_PY
    ga: float = 0.0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ModelError("dimension must be positive")
        if self.T < 0:
            raise ModelError("horizon must be nonnegative")
        if self.diffusion_scale <= 0:
            raise ModelError("diffusion scale must be positive")
        if self.form not in ("terminal", "initial"):
            raise ModelError("form must be terminal or initial")
        if self.f_arity not in ("value", "full"):
            raise ModelError("f_arity must be value or full")

    def has_reference(self) -> bool:
        return self.reference is not None


def problem_spec(
    name: str,
    d: int,
    T: float,
    f: Callable | None,
    g: Callable,
    L: float,
    frak_L: float,
    growth_p: float = 0.0,
    growth_q: float = 0.0,
    diffusion_scale: float = SQRT2,
    form: str = "terminal",
    reference: Callable | None = None,
    f_arity: str = "value",
) -> ProblemSpec:
    """User-defined problem; f = None means a vanishing nonlinearity."""
    if f is None:
        return ProblemSpec(
            name=name, d=d, T=T, f=lambda v: 0.0, g=g, L=L, frak_L=frak_L,
            growth_p=growth_p, growth_q=growth_q, diffusion_scale=diffusion_scale,
            form=form, reference=reference, f_arity="value",
            fcode=_codes.F_CONST, fa=0.0, gcode=_codes.G_PY,
        )
    fcode = _codes.F_PYVALUE if f_arity == "value" else _codes.F_PYFULL
    return ProblemSpec(
        name=name, d=d, T=T, f=f, g=g, L=L, frak_L=frak_L,
        growth_p=growth_p, growth_q=growth_q, diffusion_scale=diffusion_scale,
        form=form, reference=reference, f_arity=f_arity, fcode=fcode,
        gcode=_codes.G_PY,
    )


def _flip_form(ref: Callable, T: float) -> Callable:
    # Initial-form reference u_fwd(t, x) = u_term(T - t, x).
    return lambda t, x: ref(T - t, x)


def builtin(name: str, d: int, T: float, form: str = "terminal", **kwargs) -> ProblemSpec:
    """Named benchmark problem with an exact or ODE-oracle reference.

    heat-quadratic   f = 0, g = ||x||^2;       u(t,x) = ||x||^2 + 2 d (T-t)
    constant-source  f = 1, g = 0;             u(t,x) = T - t
    flat-ode         f = f(v) (default cos),
                     g = c;                    u(t,x) = y(t), y' = -f(y), y(T) = c
    linear-reaction  f(v) = a v, g = ||x||^2;  u(t,x) = e^{a(T-t)} (||x||^2 + 2 d (T-t))
    """
    if name == "heat-quadratic":
        ref = lambda t, x: float(np.dot(x, x)) + 2.0 * d * (T - t)
        spec = ProblemSpec(
            name=name, d=d, T=T,
            f=lambda v: 0.0, g=lambda x: float(np.dot(x, x)),
            L=0.0, frak_L=1.0, growth_p=2.0, growth_q=2.0,
            reference=ref,
            fcode=_codes.F_CONST, fa=0.0, gcode=_codes.G_NORMSQ,
        )
    elif name == "constant-source":
        spec = ProblemSpec(
            name=name, d=d, T=T,
            f=lambda v: 1.0, g=lambda x: 0.0,
            L=0.0, frak_L=1.0,
            reference=lambda t, x: T - t,
            fcode=_codes.F_CONST, fa=1.0, gcode=_codes.G_CONST, ga=0.0,
        )
    elif name == "flat-ode":
        c = float(kwargs.pop("c", 1.0))
        f = kwargs.pop("f", None)
        L = float(kwargs.pop("L", 1.0))
        if f is None:
            f = math.cos
            fcode, L = _codes.F_COS, 1.0
        else:
            fcode = _codes.F_PYVALUE
        sol = _solve_flat_ode(f, c, T)
        spec = ProblemSpec(
            name=name, d=d, T=T,
            f=f, g=lambda x, _c=c: _c,
            L=L, frak_L=max(abs(f(0.0)), abs(c)),
            reference=lambda t, x: float(sol(t)[0]),
            fcode=fcode, gcode=_codes.G_CONST, ga=c,
        )
    elif name == "linear-reaction":
        a = float(kwargs.pop("a", 1.0))
        ref = lambda t, x: math.exp(a * (T - t)) * (float(np.dot(x, x)) + 2.0 * d * (T - t))
        spec = ProblemSpec(
            name=name, d=d, T=T,
            f=lambda v, _a=a: _a * v, g=lambda x: float(np.dot(x, x)),
            L=abs(a), frak_L=1.0, growth_p=2.0, growth_q=2.0,
            reference=ref,
            fcode=_codes.F_LINEAR, fa=a, fb=0.0, gcode=_codes.G_NORMSQ,
        )
    else:
        raise ModelError(f"unknown builtin problem: {name!r}")
    if kwargs:
        raise ModelError(f"unexpected arguments for {name!r}: {sorted(kwargs)}")
    if form == "initial":
        spec = ProblemSpec(
            **{**spec.__dict__, "form": "initial", "reference": _flip_form(spec.reference, T)}
        )
    return spec


def _solve_flat_ode(f: Callable, c: float, T: float):
    from scipy.integrate import solve_ivp

    if T == 0:
        return lambda t: np.array([c])
    sol = solve_ivp(
        lambda s, y: [-f(y[0])], (T, 0.0), [c],
        dense_output=True, rtol=1e-11, atol=1e-13, method="DOP853",
    )
    if not sol.success:
        raise ModelError("flat-ode reference integration failed")
    return sol.sol


def reference_value(p: ProblemSpec, t: float, x) -> float:
    """Exact or oracle solution value at (t, x)."""
    if p.reference is None:
        raise ModelError("no reference available")
    if not 0 <= t <= p.T:
        raise ModelError("t outside [0, T]")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.d,):
        raise ModelError("point dimension mismatch")
    return float(p.reference(t, x))


def eval_f(p: ProblemSpec, t: float, x, v: float) -> float:
    if p.f_arity == "value":
        return float(p.f(v))
    return float(p.f(t, np.asarray(x, dtype=np.float64), v))


def validate_problem(p: ProblemSpec, seed: int = 0, samples: int = 1000) -> dict:
    """Sampled Lipschitz and growth checks from the problem's stated constants."""
    rng = np.random.default_rng(seed)
    ts = rng.uniform(0.0, p.T, samples) if p.T > 0 else np.zeros(samples)
    xs = rng.normal(0.0, 3.0, (samples, p.d))
    vs = rng.normal(0.0, 5.0, samples)
    ws = rng.normal(0.0, 5.0, samples)
    lip_ok = True
    for t, x, v, w in zip(ts, xs, vs, ws):
        lhs = abs(eval_f(p, t, x, v) - eval_f(p, t, x, w))
        if lhs > p.L * abs(v - w) * (1.0 + 1e-12) + 1e-300:
            lip_ok = False
            break
    growth_ok = True
    for t, x in zip(ts, xs):
        envelope = p.frak_L * (1.0 + euclidean_norm(x) ** p.growth_p)
        if max(abs(eval_f(p, t, x, 0.0)), abs(p.g(x))) > envelope * (1.0 + 1e-12):
            growth_ok = False
            break
    return {"lipschitz_ok": lip_ok, "growth_ok": growth_ok}

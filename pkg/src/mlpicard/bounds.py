"""Evaluators for the solver's analytic machinery.

Every inequality used by the error/cost analysis is available here as a
plain function: Gronwall-type bounds, Gaussian moment bounds, Monte Carlo
L^p bounds, factorial chains, the non-recursive multilevel error bound,
the complexity constant eta, and the two-step / full-history recursion
closed forms with their upper bounds.  Direct-recursion and equality-case
oracles live next to the closed forms so every bound can be checked
against its sharpest testable instance.

Factorial and power expressions are evaluated in the log domain with one
final exponentiation; floor(m**(p/2))! overflows double precision quickly.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

_SQRT2 = math.sqrt(2.0)


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class BoundInputs:
    """Constants feeding the error/cost bounds.

    ``growth_p`` is the dimension-power exponent and ``growth_q`` the
    spatial polynomial-growth exponent (the solver's problem definitions
    state growth against the Euclidean norm; mapping to these fields is the
    caller's job).  ``frak_m`` is the combined L^p Monte Carlo constant.
    """

    L: float = 0.0
    frak_L: float = 0.0
    T: float = 0.0
    growth_p: float = 0.0
    growth_q: float = 0.0
    p_hat: float = 2.0
    frak_m: float = 1.0
    d: int = 1
    x_norm: float = 0.0
    n: int = 0
    base: int = 1
    alpha: float = 1.0
    frak_d: float = 0.0
    beta_exp: float = 0.0

    def __post_init__(self) -> None:
        for name in ("L", "frak_L", "T", "growth_p", "growth_q", "x_norm", "alpha", "frak_d", "beta_exp"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise BoundsError(f"{name} must be finite and nonnegative")
        if self.p_hat < 2:
            raise BoundsError("order below 2")
        if self.frak_m < 1:
            raise BoundsError("frak_m below 1")
        if self.d < 1 or self.base < 1 or self.n < 0:
            raise BoundsError("d, base must be >= 1 and n >= 0")


@dataclass(frozen=True)
class RecursionSpec:
    """Two-step (beta2 set) or full-history recursion instance.

    Two-step instances must stay clear of the degenerate double root:
    |beta**2 + 4*beta2| above 1e-9 relative to the coefficient scale.
    """

    gamma: int
    beta: complex
    alphas: tuple[complex, ...]
    k_max: int
    beta2: complex | None = None  # two-step case second coefficient

    def __post_init__(self) -> None:
        if self.gamma not in (0, 1):
            raise BoundsError("gamma must be 0 or 1")
        if self.k_max < 0:
            raise BoundsError("k_max must be nonnegative")
        if self.beta2 is not None:
            disc = self.beta * self.beta + 4.0 * self.beta2
            if abs(disc) <= 1e-9 * max(1.0, abs(self.beta) ** 2, abs(self.beta2)):
                raise BoundsError("degenerate roots")
        elif self.beta.imag != 0 or self.beta.real <= 0:
            raise BoundsError("full-history beta must be real and positive")

    def closed_form(self, k: int) -> complex:
        if self.beta2 is not None:
            return two_step_closed_form(self.beta, self.beta2, self.alphas, k)
        return full_history_closed_form(self.gamma, self.beta.real, self.alphas, k)

    def direct(self) -> list[complex]:
        if self.beta2 is not None:
            return two_step_direct_recursion(self.beta, self.beta2, self.alphas, self.k_max)
        return full_history_direct_recursion(self.gamma, self.beta.real, self.alphas, self.k_max)


@dataclass(frozen=True)
class GronwallInputs:
    a: float
    b: float
    M: int
    N: int
    p: float
    T: float
    tau: float
    sup_f0: float

    def __post_init__(self) -> None:
        if self.M < 1 or self.N < 1:
            raise BoundsError("M, N must be positive integers")
        if self.p < 1:
            raise BoundsError("p must be at least 1")
        if not 0 <= self.tau <= self.T:
            raise BoundsError("tau outside [0, T]")
        if self.a < 0 or self.b < 0 or self.sup_f0 < 0:
            raise BoundsError("a, b, sup_f0 must be nonnegative")


def default_centering_constant(p_hat: float) -> float:
    """K_p convention: 1 at p=2, 2 for p>2 (classical centering bound)."""
    if p_hat < 2:
        raise BoundsError("order below 2")
    return 1.0 if p_hat == 2.0 else 2.0


def default_frak_m(p_hat: float) -> float:
    return default_centering_constant(p_hat) * math.sqrt(p_hat - 1.0)


def gronwall_backward_bound(beta_fn, gamma: float, T: float, t: float) -> float:
    """Backward Gronwall: alpha(t) <= beta(t) * exp(gamma * (T - t))."""
    if not 0 <= t <= T:
        raise BoundsError("t outside [0, T]")
    if gamma < 0:
        raise BoundsError("gamma must be nonnegative")
    return beta_fn(t) * math.exp(gamma * (T - t))


def gronwall_equality_solution(beta_fn, gamma: float, T: float, t_grid) -> list[float]:
    """Solve alpha(t) = beta(t) + gamma * int_t^T alpha(s) ds on a grid.

    Backward trapezoidal stepping; with equality the solution is the
    sharpest instance of the backward Gronwall hypothesis.
    """
    ts = list(t_grid)
    if len(ts) < 2 or any(b < a for a, b in zip(ts, ts[1:])):
        raise BoundsError("grid must be increasing with at least two nodes")
    alpha = [0.0] * len(ts)
    alpha[-1] = beta_fn(ts[-1])
    integral = 0.0
    for j in range(len(ts) - 2, -1, -1):
        h = ts[j + 1] - ts[j]
        denom = 1.0 - gamma * h / 2.0
        if denom <= 0:
            raise BoundsError("grid too coarse for this gamma")
        alpha[j] = (beta_fn(ts[j]) + gamma * (integral + h / 2.0 * alpha[j + 1])) / denom
        integral += h / 2.0 * (alpha[j] + alpha[j + 1])
    return alpha


def gaussian_moment_bound(r: float, x_norm: float, d: int, T: float) -> float:
    """Upper bound for sup_{t<=T} E ||x + W_t||^r."""
    if r < 0 or d < 1 or T < 0:
        raise BoundsError("invalid moment inputs")
    return (
        max(T, 1.0)
        * ((1.0 + x_norm**2) ** (r / 2.0) + (r + 1.0) * d ** (r / 2.0))
        * math.exp(r * (r + 3.0) * T / 2.0)
    )


def lp_growth_moment_bound(q: float, p_hat: float, x_norm: float, d: int, T: float) -> float:
    """Closed-form bound for sup_s (E[(1 + ||x + W_s||^q)^p])^(1/p)."""
    if q < 0 or d < 1 or T < 0:
        raise BoundsError("invalid moment inputs")
    if p_hat < 2:
        raise BoundsError("order below 2")
    return (
        2.0
        * ((1.0 + x_norm**2) ** (q / 2.0) + (q * p_hat + 1.0) ** (1.0 / p_hat) * d ** (q / 2.0))
        * math.exp((q * (q * p_hat + 3.0) + 1.0) * T / 2.0)
    )


def fixedpoint_lq_bound(
    L: float, T: float, t: float, q: float, g_moment: float, f_moment_integral: float
) -> float:
    """L^q a priori bound for the fixed-point solution along the Brownian flow."""
    if q < 1:
        raise BoundsError("q must be at least 1")
    if not 0 <= t <= T:
        raise BoundsError("t outside [0, T]")
    if g_moment < 0 or f_moment_integral < 0:
        raise BoundsError("moments must be nonnegative")
    return math.exp(L * (T - t)) * (g_moment + (T - t) ** ((q - 1.0) / q) * f_moment_integral)


def apriori_solution_bound(inputs: BoundInputs, t: float) -> float:
    """Growth bound for |u(t, x)|; uniform in t, so t only gets validated."""
    if not 0 <= t <= inputs.T:
        raise BoundsError("t outside [0, T]")
    if inputs.frak_L == 0:
        return 0.0
    moment = lp_growth_moment_bound(
        inputs.growth_q, inputs.p_hat, inputs.x_norm, inputs.d, inputs.T
    )
    return inputs.frak_L * (inputs.T + 1.0) * math.exp(inputs.L * inputs.T) * moment


def mc_lp_bound(p: float, n_samples: int, moment: float, centered: bool) -> float:
    """L^p Monte Carlo mean-deviation bound.

    centered=True: sqrt((p-1)/n) * (E|X - EX|^p)^(1/p).
    centered=False: frak_m(p)/sqrt(n) * (E|X|^p)^(1/p).
    """
    if p < 2:
        raise BoundsError("order below 2")
    if n_samples < 1:
        raise BoundsError("n_samples must be positive")
    if moment < 0:
        raise BoundsError("moment must be nonnegative")
    if centered:
        return math.sqrt((p - 1.0) / n_samples) * moment
    return default_frak_m(p) / math.sqrt(n_samples) * moment


class StirlingChain(NamedTuple):
    lower: float
    factorial: float
    upper: float
    log_lower: float
    log_factorial: float
    log_upper: float


def stirling_chain(n: int) -> StirlingChain:
    """Factorial chain 2**-0.5 n**(n+1/2) e**(1-n) <= n! <= n**(n+1/2) e**(1-n).

    This is the proof-stage chain; the looser displayed variant fails at
    n = 1, so the exponential form is the one implemented.
    """
    if n < 1:
        raise BoundsError("n must be positive")
    log_upper = (n + 0.5) * math.log(n) + 1.0 - n
    log_lower = log_upper - 0.5 * math.log(2.0)
    log_fact = math.lgamma(n + 1.0)
    return StirlingChain(
        math.exp(log_lower), math.exp(log_fact), math.exp(log_upper),
        log_lower, log_fact, log_upper,
    )


@dataclass(frozen=True)
class Talk1Report:
    m: float
    n_scan: int
    argmax_n: int
    log_max: float
    log_mid: float
    log_upper1: float
    log_upper2: float
    attained_at_sqrt: bool
    chain_ok: bool

    @property
    def passed(self) -> bool:
        return self.attained_at_sqrt and self.chain_ok


def talk1_chain(m: float, n_scan: int) -> Talk1Report:
    """max_n m**(n/2)/n! <= m**(fl/2)/fl! < exp(sqrt m)/sqrt(fl) <= exp(sqrt m),
    fl = floor(sqrt m); the max is attained at floor or ceil of sqrt(m)."""
    if m < 1:
        raise BoundsError("m must be at least 1")
    if n_scan < 1:
        raise BoundsError("n_scan must be positive")
    logs = [0.5 * n * math.log(m) - math.lgamma(n + 1.0) for n in range(n_scan + 1)]
    argmax = max(range(n_scan + 1), key=lambda n: logs[n])
    log_max = logs[argmax]
    fl = math.floor(math.sqrt(m))
    cl = math.ceil(math.sqrt(m))
    log_mid = 0.5 * fl * math.log(m) - math.lgamma(fl + 1.0)
    log_upper1 = math.sqrt(m) - 0.5 * math.log(fl)
    log_upper2 = math.sqrt(m)
    tol = 1e-12
    attained = (abs(logs[fl] - log_max) <= tol) or (cl <= n_scan and abs(logs[cl] - log_max) <= tol)
    chain_ok = (
        log_max <= log_mid + tol
        and log_mid <= log_upper1 + tol
        and log_upper1 <= log_upper2 + tol
    )
    return Talk1Report(m, n_scan, argmax, log_max, log_mid, log_upper1, log_upper2, attained, chain_ok)


def fn_gron_bound(g: GronwallInputs) -> tuple[float, float]:
    """Iterated Gronwall bound: (sharp factorial form, relaxed exponential form)."""
    width = (g.T - g.tau) ** (1.0 / g.p)
    num = (g.a + g.b * width * g.sup_f0) * (1.0 + g.b * width) ** (g.N - 1)
    if num == 0.0:
        return (0.0, 0.0)
    fl = math.floor(g.M ** (g.p / 2.0))
    log_num = math.log(num)
    log_sharp = log_num - ((g.N - fl) / 2.0) * math.log(g.M) - math.lgamma(fl + 1.0) / g.p
    log_relaxed = log_num - (g.N / 2.0) * math.log(g.M) + g.M ** (g.p / 2.0) / g.p
    return (math.exp(log_sharp), math.exp(log_relaxed))


def fn_gron_equality_case(g: GronwallInputs, nodes: int = 256) -> float:
    """f_N(tau) from the hypothesis recursion run with equality on a grid.

    f_0 is the constant sup_f0; integrals are trapezoidal.  The sharpest
    numerical instance the lemma must dominate.
    """
    if nodes < 2:
        raise BoundsError("need at least two grid nodes")
    h = (g.T - g.tau) / (nodes - 1)
    fs = [[g.sup_f0] * nodes]
    for n in range(1, g.N + 1):
        prev_tails = []
        for i in range(n):
            powed = [fs[i][j] ** g.p for j in range(nodes)]
            tail = [0.0] * nodes
            for j in range(nodes - 2, -1, -1):
                tail[j] = tail[j + 1] + h / 2.0 * (powed[j] + powed[j + 1])
            prev_tails.append(tail)
        fn = [
            g.a / g.M ** (n / 2.0)
            + sum(
                g.b / g.M ** ((n - i - 1) / 2.0) * prev_tails[i][j] ** (1.0 / g.p)
                for i in range(n)
            )
            for j in range(nodes)
        ]
        fs.append(fn)
    return fs[g.N][0]


def mlp_error_bound(inputs: BoundInputs, moment_override: float | None = None) -> tuple[float, float]:
    """Non-recursive L^p error bound for U_n at base m: (sharp, relaxed).

    sharp divides by m**((n - fl)/2) * (fl!)**(1/p), fl = floor(m**(p/2));
    relaxed divides by m**(n/2) * exp(-m**(p/2)/p).  The moment factor is
    the closed-form growth moment bound unless overridden (problems with
    zero growth have sup moment exactly 2).
    """
    if inputs.frak_L == 0.0:
        return (0.0, 0.0)
    m = float(inputs.base)
    if moment_override is not None:
        if moment_override < 0:
            raise BoundsError("moment must be nonnegative")
        moment = moment_override
    else:
        moment = lp_growth_moment_bound(
            inputs.growth_q, inputs.p_hat, inputs.x_norm, inputs.d, inputs.T
        )
    log_num = (
        math.log(inputs.frak_m)
        + math.log(inputs.frak_L)
        + math.log(inputs.T + 1.0)
        + inputs.L * inputs.T
        + inputs.n * math.log1p(2.0 * inputs.L * inputs.T)
        + math.log(moment)
    )
    fl = math.floor(m ** (inputs.p_hat / 2.0))
    log_sharp = log_num - ((inputs.n - fl) / 2.0) * math.log(m) - math.lgamma(fl + 1.0) / inputs.p_hat
    log_relaxed = log_num - (inputs.n / 2.0) * math.log(m) + m ** (inputs.p_hat / 2.0) / inputs.p_hat
    return (math.exp(log_sharp), math.exp(log_relaxed))


def eta_constant_log(
    L: float, growth_p: float, growth_q: float, p_hat: float, frak_m: float, d: int, T: float
) -> float:
    """log of the complexity constant eta; -inf when L = 0."""
    if L < 0:
        raise BoundsError("L must be nonnegative")
    if L == 0.0:
        return -math.inf
    q = growth_q
    return (
        math.log(frak_m)
        + math.log(L)
        + max(q, 1.0) * math.log(2.0)
        + (growth_p + q) * math.log(d)
        + math.log((1.0 + L * L) ** (q / 2.0) + (q * p_hat + 1.0) ** (1.0 / p_hat))
        + (q * (q * p_hat + 3.0) + 1.0) * T / 2.0
        + (L + 1.0) * T
    )


def eta_constant(inputs: BoundInputs) -> float:
    """Complexity constant eta_{d,p}."""
    log_eta = eta_constant_log(
        L=inputs.L,
        growth_p=inputs.growth_p,
        growth_q=inputs.growth_q,
        p_hat=inputs.p_hat,
        frak_m=inputs.frak_m,
        d=inputs.d,
        T=inputs.T,
    )
    if log_eta == -math.inf:
        return 0.0
    return math.exp(log_eta)


_DEGENERACY_TOL = 1e-9


def two_step_closed_form(
    beta1: complex, beta2: complex, alphas: Sequence[complex], k: int
) -> complex:
    """Closed form of x_k = alpha_k + beta1*x_{k-1} + beta2*x_{k-2}."""
    if k < 0:
        raise BoundsError("k must be nonnegative")
    disc = beta1 * beta1 + 4.0 * beta2
    if abs(disc) <= _DEGENERACY_TOL * max(1.0, abs(beta1) ** 2, abs(beta2)):
        raise BoundsError("degenerate roots")
    root = cmath.sqrt(disc)
    b1 = 0.5 * (beta1 + root)
    b2 = 0.5 * (beta1 - root)
    total = 0.0 + 0.0j
    for l in range(k + 1):
        al = complex(alphas[l]) if l < len(alphas) else 0.0 + 0.0j
        if al != 0:
            total += al * (b1 ** (k + 1 - l) - b2 ** (k + 1 - l))
    return total / (b1 - b2)


def two_step_direct_recursion(
    beta1: complex, beta2: complex, alphas: Sequence[complex], k_max: int
) -> list[complex]:
    """Oracle: the two-step recursion evaluated directly."""
    xs: list[complex] = []
    for k in range(k_max + 1):
        al = complex(alphas[k]) if k < len(alphas) else 0.0 + 0.0j
        x = al
        if k >= 1:
            x += beta1 * xs[k - 1]
        if k >= 2:
            x += beta2 * xs[k - 2]
        xs.append(x)
    return xs


def full_history_closed_form(
    gamma: int, beta: float, alphas: Sequence[complex], k: int
) -> complex:
    """Closed form of the full-history recursion
    x_k = alpha_k + sum_{l<k} (k-l)**gamma beta**(k-l) [x_l + 1_N(l) x_{l-1}]."""
    if gamma not in (0, 1):
        raise BoundsError("gamma must be 0 or 1")
    if beta <= 0:
        raise BoundsError("beta must be positive")
    if k < 0:
        raise BoundsError("k must be nonnegative")
    s = math.sqrt(5.0**gamma * beta * beta + 4.0**gamma * beta)
    b1 = 3.0**gamma * beta + s
    b2 = 3.0**gamma * beta - s

    def alpha_at(l: int) -> complex:
        return complex(alphas[l]) if 0 <= l < len(alphas) else 0.0 + 0.0j

    total = 0.0 + 0.0j
    for l in range(k + 1):
        num = alpha_at(l)
        if l >= 1:
            num -= 2.0**gamma * beta * alpha_at(l - 1)
        if l >= 2 and gamma == 1:
            num += beta * beta * alpha_at(l - 2)
        if num != 0:
            total += (
                num
                * (b1 ** (k + 1 - l) - b2 ** (k + 1 - l))
                / (2.0 ** (1 + gamma * (k - l)) * s)
            )
    return total


def full_history_direct_recursion(
    gamma: int, beta: float, alphas: Sequence[complex], k_max: int
) -> list[complex]:
    """Oracle: the full-history recursion evaluated directly."""
    xs: list[complex] = []
    for k in range(k_max + 1):
        al = complex(alphas[k]) if k < len(alphas) else 0.0 + 0.0j
        acc = al
        for l in range(k):
            term = xs[l]
            if l >= 1:
                term = term + xs[l - 1]
            acc += (k - l) ** gamma * beta ** (k - l) * term
        xs.append(acc)
    return xs


def full_history_equality_recursion(
    gamma: int, beta: float, alpha0: float, alpha1: float, k_max: int
) -> list[float]:
    """Equality case of the bounded full-history recursion
    x_k = 1_N(k) (alpha0 + alpha1 k) beta**k + sum_{l<k} (k-l)**gamma beta**(k-l)
    [x_l + x_{max(l-1,0)}]; the sharpest instance its upper bound must dominate."""
    xs: list[float] = []
    for k in range(k_max + 1):
        acc = (alpha0 + alpha1 * k) * beta**k if k >= 1 else 0.0
        for l in range(k):
            acc += (k - l) ** gamma * beta ** (k - l) * (xs[l] + xs[max(l - 1, 0)])
        xs.append(acc)
    return xs


def full_history_upper_bound(
    gamma: int, beta: float, alpha0: float, alpha1: float, k: int
) -> float:
    """Closed bound for the full-history recursion: 0 at k = 0, else
    (alpha0+alpha1)/2 * ((1+sqrt2) beta)**k  (gamma=0) or
    (alpha0+alpha1)/sqrt5 * (3 beta)**k      (gamma=1)."""
    if gamma not in (0, 1):
        raise BoundsError("gamma must be 0 or 1")
    if beta < 1:
        raise BoundsError("beta must be at least 1")
    if alpha0 < 0 or alpha1 < 0:
        raise BoundsError("alpha0, alpha1 must be nonnegative")
    if k < 0:
        raise BoundsError("k must be nonnegative")
    if k == 0:
        return 0.0
    if gamma == 0:
        return (alpha0 + alpha1) * 0.5 * ((1.0 + _SQRT2) * beta) ** k
    return (alpha0 + alpha1) / math.sqrt(5.0) * (3.0 * beta) ** k


class CostBound(NamedTuple):
    recursion: float
    closed: float


def cost_recursion_bound(n: int, base: int, alpha_d: float) -> CostBound:
    """Cost recursion FC_n = alpha_d*base**n + sum_k base**(n-k) (alpha_d +
    FC_k + FC_{max(k-1,0)}) and its closed bound alpha_d (1+sqrt2)**n base**n."""
    if n < 0 or base < 1 or alpha_d < 0:
        raise BoundsError("invalid cost inputs")
    fc = [0.0]
    for j in range(1, n + 1):
        val = alpha_d * float(base) ** j
        for k in range(j):
            val += float(base) ** (j - k) * (alpha_d + fc[k] + fc[max(k - 1, 0)])
        fc.append(val)
    closed = 0.0 if n == 0 else alpha_d * (1.0 + _SQRT2) ** n * float(base) ** n
    if not (math.isfinite(fc[n]) and math.isfinite(closed)):
        raise BoundsError("cost bound overflow")
    return CostBound(fc[n], closed)


@dataclass(frozen=True)
class BoundReport:
    """Evaluated error bound with every input echoed."""

    inputs: BoundInputs
    sharp: float
    relaxed: float
    moment_override: float | None = None

    def lines(self) -> list[tuple[str, object]]:
        i = self.inputs
        return [
            ("d", i.d), ("T", i.T), ("n", i.n), ("base", i.base),
            ("p_hat", i.p_hat), ("L", i.L), ("frak_L", i.frak_L),
            ("frak_m", i.frak_m), ("growth_p", i.growth_p),
            ("growth_q", i.growth_q), ("x_norm", i.x_norm),
            ("moment_override", self.moment_override),
            ("bound_sharp", repr(self.sharp)), ("bound_relaxed", repr(self.relaxed)),
        ]


def bound_report(inputs: BoundInputs, moment_override: float | None = None) -> BoundReport:
    sharp, relaxed = mlp_error_bound(inputs, moment_override)
    return BoundReport(inputs=inputs, sharp=sharp, relaxed=relaxed,
                       moment_override=moment_override)


def bound_inputs_for_problem(
    problem, n: int, base: int, p_hat: float, x_norm: float, frak_m: float | None = None
) -> BoundInputs:
    """BoundInputs for an estimator run on a problem instance.

    Problems with diffusion scale sigma are handled through the substitution
    v(t, x) = u(t, sigma x), which has unit diffusion, growth constant
    frak_L * sigma**growth_p, and evaluation point x / sigma.
    """
    if frak_m is None:
        frak_m = default_frak_m(p_hat)
    sigma = problem.diffusion_scale
    frak_l_eff = problem.frak_L * max(1.0, sigma) ** problem.growth_p
    return BoundInputs(
        L=problem.L,
        frak_L=frak_l_eff,
        T=problem.T,
        growth_p=0.0,
        growth_q=problem.growth_p,
        p_hat=p_hat,
        frak_m=frak_m,
        d=problem.d,
        x_norm=x_norm / sigma,
        n=n,
        base=base,
    )

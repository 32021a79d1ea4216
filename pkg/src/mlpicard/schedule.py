"""Sample-count schedule, L^p Monte Carlo constants, and the n(d, eps) selector.

The schedule ``phi(m) = floor(exp(sqrt(ln m)))`` grows slowly enough that
``phi(m)**(p/2) / m`` stays bounded for every p, which is what tames the
``exp(m**(p/2)/p)`` factor in the non-recursive error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mlpicard import bounds

# Below this distance from an integer, exp(sqrt(ln m)) is recomputed in
# extended precision before flooring.
_ULP_GUARD = 1e-9


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class LpConstants:
    """Centering constant K_p and the combined constant m_p = K_p*sqrt(p-1)."""

    p_hat: float
    kp: float
    frak_m: float = field(init=False)

    def __post_init__(self) -> None:
        if self.p_hat < 2:
            raise ScheduleError("order below 2")
        if self.kp < 1:
            raise ScheduleError("centering constant below 1")
        object.__setattr__(self, "frak_m", self.kp * math.sqrt(self.p_hat - 1.0))


@dataclass(frozen=True)
class ComplexityQuery:
    """Inputs for the accuracy-to-iterations selector.

    ``L`` plays the combined Lipschitz/growth role of the complexity
    proposition's single constant; ``growth_p`` is the dimension-power
    exponent and ``growth_q`` the spatial growth exponent.
    """

    d: int
    eps: float
    delta: float = 0.5
    p_hat: float = 2.0
    L: float = 1.0
    growth_p: float = 0.0
    growth_q: float = 0.0
    T: float = 1.0
    kp: float | None = None
    n_cap: int = 64

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ScheduleError("eps must be positive")
        if self.delta <= 0:
            raise ScheduleError("delta must be positive")


def phi(m: int) -> int:
    """floor(exp(sqrt(ln m))); the scheduled Monte Carlo base."""
    if m < 1:
        raise ScheduleError("schedule undefined")
    v = math.exp(math.sqrt(math.log(m)))
    if abs(v - round(v)) < _ULP_GUARD:
        return _phi_extended(m)
    return int(math.floor(v))


def _phi_extended(m: int) -> int:
    import mpmath

    with mpmath.workdps(50):
        return int(mpmath.floor(mpmath.exp(mpmath.sqrt(mpmath.log(m)))))


def phi_array(ms: np.ndarray) -> np.ndarray:
    """Vectorized phi with the same near-integer guard as the scalar form."""
    ms = np.asarray(ms, dtype=np.int64)
    if ms.min() < 1:
        raise ScheduleError("schedule undefined")
    v = np.exp(np.sqrt(np.log(ms.astype(np.float64))))
    out = np.floor(v).astype(np.int64)
    risky = np.abs(v - np.rint(v)) < _ULP_GUARD
    for idx in np.nonzero(risky)[0]:
        out[idx] = _phi_extended(int(ms[idx]))
    return out


@dataclass(frozen=True)
class PhiReport:
    m_max: int
    doubling_ok: bool
    nondecreasing_ok: bool
    decade_ratios: tuple[tuple[int, float], ...]
    ratios_decreasing: bool

    @property
    def passed(self) -> bool:
        return self.doubling_ok and self.nondecreasing_ok and self.ratios_decreasing


def check_phi_properties(m_max: int) -> PhiReport:
    """Scan phi(m+1) <= 2*phi(m) and monotonicity up to m_max; report the
    decreasing trend of phi(m)**3 / m over decades 1e3..1e7."""
    if m_max < 2:
        raise ScheduleError("m_max must be at least 2")
    vals = phi_array(np.arange(1, m_max + 2))
    doubling_ok = bool(np.all(vals[1:] <= 2 * vals[:-1]))
    nondecr_ok = bool(np.all(np.diff(vals) >= 0))
    decades = [10**k for k in range(3, 8)]
    ratios = tuple((m, phi(m) ** 3 / m) for m in decades)
    # Witness of the vanishing-ratio property: strictly decreasing over the
    # last three decades.
    tail = [r for _, r in ratios[-3:]]
    decreasing = all(a > b for a, b in zip(tail, tail[1:]))
    return PhiReport(m_max, doubling_ok, nondecr_ok, ratios, decreasing)


def kp_constant(p_hat: float, kp: float | None = None) -> LpConstants:
    """Centering constant: 1 at p=2 (variance is tight), 2 above (classical
    bound).  The true infimum is not pinned numerically; any upper bound
    yields valid certified bounds, and kp is overridable."""
    if p_hat < 2:
        raise ScheduleError("order below 2")
    if kp is None:
        kp = bounds.default_centering_constant(p_hat)
    return LpConstants(p_hat=float(p_hat), kp=float(kp))


def selector_log_bound(n: int, query: ComplexityQuery) -> float:
    """log of eta * [(1+2LT) * exp(phi(n)**(p/2)/n) / phi(n)**(1/2)]**n."""
    consts = kp_constant(query.p_hat, query.kp)
    log_eta = bounds.eta_constant_log(
        L=query.L,
        growth_p=query.growth_p,
        growth_q=query.growth_q,
        p_hat=query.p_hat,
        frak_m=consts.frak_m,
        d=query.d,
        T=query.T,
    )
    if log_eta == -math.inf:
        return -math.inf
    base = phi(n)
    bracket = (
        math.log1p(2.0 * query.L * query.T)
        + base ** (query.p_hat / 2.0) / n
        - 0.5 * math.log(base)
    )
    return log_eta + n * bracket


def choose_n(query: ComplexityQuery) -> int:
    """Smallest n >= 1 whose scheduled error bound is at most eps.

    The bracket is evaluated in the log domain; the scan is capped at
    query.n_cap because the theoretical guarantee of finiteness kicks in
    only at schedule scales far beyond desk range.
    """
    log_eps = math.log(query.eps)
    for n in range(1, query.n_cap + 1):
        if selector_log_bound(n, query) <= log_eps:
            return n
    raise ScheduleError(
        f"selector exceeded cap: no n <= {query.n_cap} certifies eps={query.eps}"
    )

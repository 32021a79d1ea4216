"""Recursive multilevel Picard estimator with exact cost instrumentation.

One realization of U_n(t, x) is a deterministic function of
(problem, params, t, x, stream key): every sampling node draws its time
and Brownian point from the stream addressed by its index-path child key,
so subtree evaluations and replications are schedule-independent and may
run in parallel.  Brownian points are sampled exactly (each Brownian
motion in the scheme is evaluated at a single time, so a scaled Gaussian
vector suffices; no path discretization is involved).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mlpicard import schedule
from mlpicard._kernel import impl
from mlpicard.model import ProblemSpec
from mlpicard.stream import StreamKey

_COUNT_LIMIT = 1 << 63


class EngineError(ValueError):
    pass


@dataclass(frozen=True)
class MlpParams:
    """Iteration depth and Monte Carlo base.

    base_mode "raw" uses m itself; "scheduled" uses phi(m), so the diagonal
    U_{n,n} of the complexity theorem is params with base_mode="scheduled",
    m = n.
    """

    n: int
    m: int
    base_mode: str = "scheduled"
    p_hat: float = 2.0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise EngineError("iteration depth must be nonnegative")
        if self.m < 1:
            raise EngineError("sample base must be positive")
        if self.base_mode not in ("raw", "scheduled"):
            raise EngineError("base_mode must be raw or scheduled")
        if self.p_hat < 2:
            raise EngineError("order below 2")

    @property
    def effective_base(self) -> int:
        return self.m if self.base_mode == "raw" else schedule.phi(self.m)


@dataclass(frozen=True)
class CostLedger:
    f_evals: int = 0
    g_evals: int = 0
    uniform_draws: int = 0
    gaussian_scalar_draws: int = 0
    total: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "total",
            self.f_evals + self.g_evals + self.uniform_draws + self.gaussian_scalar_draws,
        )

    def __add__(self, other: "CostLedger") -> "CostLedger":
        return CostLedger(
            self.f_evals + other.f_evals,
            self.g_evals + other.g_evals,
            self.uniform_draws + other.uniform_draws,
            self.gaussian_scalar_draws + other.gaussian_scalar_draws,
        )


@dataclass(frozen=True)
class Realization:
    value: float
    ledger: CostLedger
    key: StreamKey


def predicted_cost(n: int, base: int, d: int) -> CostLedger:
    """Exact deterministic ledger of one realization of U_n at this base.

    C_0 = 0;  C_n = base**n * (g: 1, gauss: d)
              + sum_{i<n} base**(n-i) * (uniform: 1, gauss: d,
                f: 1 + C_i, plus for i >= 1 another f: 1 + C_{i-1}).
    """
    if n < 0 or base < 1 or d < 1:
        raise EngineError("invalid cost inputs")
    per_level: list[tuple[int, int, int, int]] = [(0, 0, 0, 0)]
    for j in range(1, n + 1):
        f = g = u = z = 0
        g += base**j
        z += base**j * d
        for i in range(j):
            k = base ** (j - i)
            fi, gi, ui, zi = per_level[i]
            f += k * (1 + fi)
            g += k * gi
            u += k * (1 + ui)
            z += k * (d + zi)
            if i >= 1:
                fp, gp, up, zp = per_level[i - 1]
                f += k * (1 + fp)
                g += k * gp
                u += k * up
                z += k * zp
        per_level.append((f, g, u, z))
    f, g, u, z = per_level[n]
    if f + g + u + z >= _COUNT_LIMIT:
        raise EngineError("tree too large")
    return CostLedger(f, g, u, z)


def estimate(p: ProblemSpec, params: MlpParams, t: float, x, key: StreamKey) -> Realization:
    """One realization of U_n(t, x) under the given stream key."""
    if not 0 <= t <= p.T:
        raise EngineError("t outside [0, T]")
    xa = np.ascontiguousarray(x, dtype=np.float64)
    if xa.shape != (p.d,):
        raise EngineError("point dimension mismatch")
    base = params.effective_base
    if params.n > 0 and base**params.n >= _COUNT_LIMIT:
        raise EngineError("tree too large")
    predicted_cost(params.n, base, p.d)  # tighter count guard

    t_eval = p.T - t if p.form == "initial" else t
    fpy = p.f
    if p.f_arity == "full" and p.form == "initial":
        T = p.T
        user_f = p.f
        fpy = lambda s, y, v: user_f(T - s, y, v)

    value, f_e, g_e, u_d, z_d = impl.mlp_estimate(
        xa, t_eval, p.T, params.n, base, p.diffusion_scale,
        p.fcode, p.fa, p.fb, fpy,
        p.gcode, p.ga, p.g,
        key.root_seed, key.path,
    )
    ledger = CostLedger(int(f_e), int(g_e), int(u_d), int(z_d))
    return Realization(float(value), ledger, key)


def replicate(
    p: ProblemSpec,
    params: MlpParams,
    t: float,
    x,
    reps: int,
    root_seed: int,
    threads: int | None = None,
) -> list[Realization]:
    """reps independent realizations keyed path=(rep_index,), in index order.

    Results are independent of the parallel schedule: streams are keyed and
    the list is assembled by replication index.
    """
    if reps < 1:
        raise EngineError("reps must be positive")
    keys = [StreamKey(root_seed, (r,)) for r in range(reps)]
    if threads is None:
        threads = min(reps, os.cpu_count() or 1)
    if threads <= 1 or reps == 1:
        return [estimate(p, params, t, x, k) for k in keys]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda k: estimate(p, params, t, x, k), keys))

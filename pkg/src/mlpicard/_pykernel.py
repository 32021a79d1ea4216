"""Pure-Python evaluation kernel.

This module is the reference implementation of the hot path: keyed
counter-mode randomness and the recursive multilevel Picard estimator.
The compiled extension ``mlpicard._mlpcore`` implements the identical
algorithm; both produce bit-identical draw sequences and (up to IEEE
rounding of the same operation order) identical estimates.

Randomness contract
-------------------
A stream is addressed by ``(root_seed, path)`` where ``path`` is a finite
sequence of signed 64-bit integers.  The key is a 128-bit sponge state
obtained by absorbing ``len(path)`` followed by the path elements in
order (two's-complement for negatives).  Output word ``i`` of a stream is

    out_i = mix64(h1 ^ mix64(h2 + (i+1)*GOLD))

with ``mix64`` the splitmix64 finalizer.  Word -> scalar maps:

    uniform  : (out >> 11) * 2**-53            in [0, 1)
    gaussian : ndtri(((out >> 12) + 0.5) * 2**-52)

The gaussian map keeps its argument strictly inside (0, 1) so the inverse
normal CDF never produces an infinity.  One output word is consumed per
scalar, so draw accounting is exact.

Node draw layout (used by the estimator and by ``stream.Stream``):
a sampling node consumes counter 0 for its uniform (time sample) and
counters 1..d for its Gaussian vector; a terminal-datum node consumes
counters 0..d-1 for its Gaussian vector.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

BACKEND = "python"

_MASK = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15  # 2**64 / golden ratio (splitmix64 increment)
_MIX1 = 0xBF58476D1CE4E5B9  # splitmix64 finalizer
_MIX2 = 0x94D049BB133111EB  # splitmix64 finalizer
_SEED1 = 0x5851F42D4C957F2D  # PCG multiplier, lane-1 init tweak
_ABS2 = 0xFF51AFD7ED558CCD  # murmur3 fmix64, lane-2 absorb tweak

# Nonlinearity / datum codes shared with the compiled kernel.
F_PYFULL = 0  # f(s, y, v) python callback
F_CONST = 1  # f == fa
F_LINEAR = 2  # f(v) = fa*v + fb
F_COS = 3  # f(v) = cos(v)
F_PYVALUE = 4  # f(v) python callback
G_PY = 0  # g(y) python callback
G_CONST = 1  # g == ga
G_NORMSQ = 2  # g(y) = sum y_j^2


def mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _init_state(root_seed: int) -> tuple[int, int]:
    root_seed &= _MASK
    return mix64(root_seed ^ _SEED1), mix64((root_seed + _GOLD) & _MASK)


def _absorb(h1: int, h2: int, v: int) -> tuple[int, int]:
    v &= _MASK
    h1 = mix64(h1 ^ mix64((v + _GOLD) & _MASK))
    h2 = mix64((h2 + mix64(v ^ _ABS2)) & _MASK)
    return h1, h2


def derive_key(root_seed: int, path) -> tuple[int, int]:
    """128-bit stream key for (root_seed, path); length-prefixed absorb."""
    h1, h2 = _init_state(root_seed)
    h1, h2 = _absorb(h1, h2, len(path))
    for e in path:
        h1, h2 = _absorb(h1, h2, int(e))
    return h1, h2


def raw_words(h1: int, h2: int, start: int, count: int) -> np.ndarray:
    """Output words start..start+count-1 of the keyed counter stream."""
    with np.errstate(over="ignore"):
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        t = np.uint64(h2) + idx * np.uint64(_GOLD)
        t = _vmix64(t)
        return _vmix64(np.uint64(h1) ^ t)


def _vmix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))


def uniforms_from_key(h1: int, h2: int, start: int, count: int) -> np.ndarray:
    w = raw_words(h1, h2, start, count)
    return (w >> np.uint64(11)).astype(np.float64) * 2.0**-53


def gaussians_from_key(h1: int, h2: int, start: int, count: int) -> np.ndarray:
    w = raw_words(h1, h2, start, count)
    u = ((w >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52
    return ndtri(u)


def _vec_absorb(h1: int, h2: int, vs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Absorb one final element, vectorized over candidate values vs."""
    with np.errstate(over="ignore"):
        vs = vs.astype(np.uint64)
        a1 = _vmix64(np.uint64(h1) ^ _vmix64(vs + np.uint64(_GOLD)))
        a2 = _vmix64(np.uint64(h2) + _vmix64(vs ^ np.uint64(_ABS2)))
    return a1, a2


class _Neumaier:
    """Compensated accumulator; op order matches the compiled kernel."""

    __slots__ = ("s", "c")

    def __init__(self) -> None:
        self.s = 0.0
        self.c = 0.0

    def add(self, v: float) -> None:
        s = self.s
        t = s + v
        if abs(s) >= abs(v):
            self.c += (s - t) + v
        else:
            self.c += (v - t) + s
        self.s = t

    def total(self) -> float:
        return self.s + self.c


def _normsq(y: np.ndarray) -> float:
    # Sequential sum matching the C kernel exactly.
    s = 0.0
    for v in y:
        s += v * v
    return s


class _Ctx:
    __slots__ = (
        "base", "T", "d", "scale", "fcode", "fa", "fb", "fpy",
        "gcode", "ga", "gpy", "root", "f_evals", "g_evals",
        "uniform_draws", "gaussian_draws",
    )


def _eval_f(ctx: _Ctx, s: float, y: np.ndarray, v: float) -> float:
    ctx.f_evals += 1
    fc = ctx.fcode
    if fc == F_CONST:
        return ctx.fa
    if fc == F_LINEAR:
        return ctx.fa * v + ctx.fb
    if fc == F_COS:
        return math.cos(v)
    if fc == F_PYVALUE:
        return float(ctx.fpy(v))
    return float(ctx.fpy(s, y, v))


def _eval_g(ctx: _Ctx, y: np.ndarray) -> float:
    ctx.g_evals += 1
    gc = ctx.gcode
    if gc == G_CONST:
        return ctx.ga
    if gc == G_NORMSQ:
        return _normsq(y)
    return float(ctx.gpy(y))


def _eval_node(ctx: _Ctx, n: int, t: float, x: np.ndarray, path: list[int]) -> float:
    if n <= 0:
        return 0.0

    base = ctx.base
    T = ctx.T
    d = ctx.d
    plen = len(path) + 2

    h1, h2 = _init_state(ctx.root)
    h1, h2 = _absorb(h1, h2, plen)
    for e in path:
        h1, h2 = _absorb(h1, h2, e)

    # Terminal-datum average over base**n children keyed path + (0, -k).
    kg = base**n
    g1, g2 = _absorb(h1, h2, 0)
    ks = np.arange(-1, -kg - 1, -1, dtype=np.int64)
    c1, c2 = _vec_absorb(g1, g2, ks)
    with np.errstate(over="ignore"):
        words = _vmix64(
            c1[:, None]
            ^ _vmix64(c2[:, None] + np.arange(1, d + 1, dtype=np.uint64)[None, :] * np.uint64(_GOLD))
        )
    z = ndtri(((words >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52)
    scale_g = ctx.scale * math.sqrt(T - t)
    ys = x[None, :] + scale_g * z
    ctx.gaussian_draws += kg * d
    acc = _Neumaier()
    for k in range(kg):
        acc.add(_eval_g(ctx, ys[k]))
    value = acc.total() / kg

    # Level sums i = 0..n-1 over base**(n-i) children keyed path + (i, k).
    for i in range(n):
        ki = base ** (n - i)
        l1, l2 = _absorb(h1, h2, i)
        ks = np.arange(1, ki + 1, dtype=np.int64)
        c1, c2 = _vec_absorb(l1, l2, ks)
        with np.errstate(over="ignore"):
            words = _vmix64(
                c1[:, None]
                ^ _vmix64(c2[:, None] + np.arange(1, d + 2, dtype=np.uint64)[None, :] * np.uint64(_GOLD))
            )
        us = (words[:, 0] >> np.uint64(11)).astype(np.float64) * 2.0**-53
        z = ndtri(((words[:, 1:] >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52)
        ctx.uniform_draws += ki
        ctx.gaussian_draws += ki * d
        acc = _Neumaier()
        for k in range(ki):
            u = us[k]
            s = t + (T - t) * u
            y = x + (ctx.scale * math.sqrt(s - t)) * z[k]
            path.extend((i, k + 1))
            vhi = _eval_node(ctx, i, s, y, path)
            path[-2] = -i
            vlo = _eval_node(ctx, i - 1, s, y, path) if i >= 1 else 0.0
            del path[-2:]
            term = _eval_f(ctx, s, y, vhi)
            if i >= 1:
                term -= _eval_f(ctx, s, y, vlo)
            acc.add(term)
        value += (T - t) * (acc.total() / ki)

    return value


def mlp_estimate(
    x: np.ndarray,
    t: float,
    T: float,
    n: int,
    base: int,
    diffusion_scale: float,
    fcode: int,
    fa: float,
    fb: float,
    fpy,
    gcode: int,
    ga: float,
    gpy,
    root_seed: int,
    path_prefix,
) -> tuple[float, int, int, int, int]:
    """One realization of U_n(t, x); returns (value, f, g, uniform, gauss) counts."""
    ctx = _Ctx()
    ctx.base = int(base)
    ctx.T = float(T)
    ctx.d = len(x)
    ctx.scale = float(diffusion_scale)
    ctx.fcode = int(fcode)
    ctx.fa = float(fa)
    ctx.fb = float(fb)
    ctx.fpy = fpy
    ctx.gcode = int(gcode)
    ctx.ga = float(ga)
    ctx.gpy = gpy
    ctx.root = int(root_seed) & _MASK
    ctx.f_evals = 0
    ctx.g_evals = 0
    ctx.uniform_draws = 0
    ctx.gaussian_draws = 0
    value = _eval_node(ctx, int(n), float(t), np.asarray(x, dtype=np.float64), list(path_prefix))
    return value, ctx.f_evals, ctx.g_evals, ctx.uniform_draws, ctx.gaussian_draws

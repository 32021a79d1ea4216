# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernel.

Same algorithm as ``mlpicard._pykernel`` (the module docstring there is the
contract): splitmix64-finalizer sponge keyed by (root_seed, path), counter-mode
output words, inverse-CDF gaussians, and the recursive multilevel Picard
estimator with Neumaier-compensated level sums.  Draw sequences are
bit-identical to the pure-Python kernel; estimates match up to identical IEEE
operation order.

Built-in nonlinearity/datum codes evaluate without the GIL, so replications
parallelize across threads.  Python callbacks (codes 0/4 for f, 0 for g)
reacquire the GIL per evaluation.
"""

from cpython.ref cimport PyObject
from libc.math cimport cos, fabs, sqrt
from libc.stdint cimport int64_t, uint64_t

import numpy as np

from scipy.special.cython_special cimport ndtri

BACKEND = "compiled"

cdef uint64_t GOLD = <uint64_t>0x9E3779B97F4A7C15
cdef uint64_t MIX1 = <uint64_t>0xBF58476D1CE4E5B9
cdef uint64_t MIX2 = <uint64_t>0x94D049BB133111EB
cdef uint64_t SEED1 = <uint64_t>0x5851F42D4C957F2D
cdef uint64_t ABS2 = <uint64_t>0xFF51AFD7ED558CCD

cdef double TWO_NEG53 = 1.0 / 9007199254740992.0
cdef double TWO_NEG52 = 1.0 / 4503599627370496.0

F_PYFULL = 0
F_CONST = 1
F_LINEAR = 2
F_COS = 3
F_PYVALUE = 4
G_PY = 0
G_CONST = 1
G_NORMSQ = 2


cdef inline uint64_t c_mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef struct KeyState:
    uint64_t h1
    uint64_t h2


cdef inline void init_state(KeyState* st, uint64_t root) noexcept nogil:
    st.h1 = c_mix64(root ^ SEED1)
    st.h2 = c_mix64(root + GOLD)


cdef inline void absorb(KeyState* st, uint64_t v) noexcept nogil:
    st.h1 = c_mix64(st.h1 ^ c_mix64(v + GOLD))
    st.h2 = c_mix64(st.h2 + c_mix64(v ^ ABS2))


cdef inline uint64_t word_at(uint64_t h1, uint64_t h2, uint64_t i) noexcept nogil:
    return c_mix64(h1 ^ c_mix64(h2 + (i + 1) * GOLD))


cdef inline double uniform_from_word(uint64_t w) noexcept nogil:
    return <double>(w >> 11) * TWO_NEG53


cdef inline double gauss_from_word(uint64_t w) noexcept nogil:
    return ndtri((<double>(w >> 12) + 0.5) * TWO_NEG52)


cdef struct EvalCtx:
    int64_t base
    double T
    int d
    double scale
    int fcode
    double fa
    double fb
    PyObject* fpy
    int gcode
    double ga
    PyObject* gpy
    uint64_t root
    int prefix_len
    int64_t* path
    double* ybuf
    unsigned long long f_evals
    unsigned long long g_evals
    unsigned long long uniform_draws
    unsigned long long gaussian_draws


cdef double _call_f_py(EvalCtx* ctx, double s, double* y, double v):
    cdef object fobj = <object>ctx.fpy
    if ctx.fcode == 4:
        return float(fobj(v))
    arr = np.empty(ctx.d, dtype=np.float64)
    cdef double[::1] a = arr
    cdef int j
    for j in range(ctx.d):
        a[j] = y[j]
    return float(fobj(s, arr, v))


cdef double _call_g_py(EvalCtx* ctx, double* y):
    cdef object gobj = <object>ctx.gpy
    arr = np.empty(ctx.d, dtype=np.float64)
    cdef double[::1] a = arr
    cdef int j
    for j in range(ctx.d):
        a[j] = y[j]
    return float(gobj(arr))


cdef double eval_f(EvalCtx* ctx, double s, double* y, double v) except? -9.0e307 nogil:
    cdef double r
    ctx.f_evals += 1
    if ctx.fcode == 1:
        return ctx.fa
    elif ctx.fcode == 2:
        return ctx.fa * v + ctx.fb
    elif ctx.fcode == 3:
        return cos(v)
    with gil:
        r = _call_f_py(ctx, s, y, v)
    return r


cdef double eval_g(EvalCtx* ctx, double* y) except? -9.0e307 nogil:
    cdef double r, acc
    cdef int j
    ctx.g_evals += 1
    if ctx.gcode == 1:
        return ctx.ga
    elif ctx.gcode == 2:
        acc = 0.0
        for j in range(ctx.d):
            acc += y[j] * y[j]
        return acc
    with gil:
        r = _call_g_py(ctx, y)
    return r


cdef inline int64_t ipow(int64_t b, int e) noexcept nogil:
    cdef int64_t r = 1
    cdef int i
    for i in range(e):
        r *= b
    return r


cdef double eval_node(EvalCtx* ctx, int n, double t, double* x, int depth) except? -9.0e307 nogil:
    cdef KeyState st0, stl, st
    cdef double value, acc_s, acc_c, tmp, term, scale_g, sc, u, s_time, v, vhi, vlo
    cdef double* y
    cdef int64_t kg, ki, k
    cdef int i, j, plen, pfill

    if n <= 0:
        return 0.0

    pfill = ctx.prefix_len + 2 * depth
    plen = pfill + 2
    init_state(&st0, ctx.root)
    absorb(&st0, <uint64_t>plen)
    for j in range(pfill):
        absorb(&st0, <uint64_t>ctx.path[j])

    y = ctx.ybuf + depth * ctx.d
    scale_g = ctx.scale * sqrt(ctx.T - t)

    # Terminal-datum average over base**n children keyed path + (0, -k).
    kg = ipow(ctx.base, n)
    stl = st0
    absorb(&stl, 0)
    acc_s = 0.0
    acc_c = 0.0
    for k in range(1, kg + 1):
        st = stl
        absorb(&st, <uint64_t>(-k))
        for j in range(ctx.d):
            y[j] = x[j] + scale_g * gauss_from_word(word_at(st.h1, st.h2, <uint64_t>j))
        v = eval_g(ctx, y)
        tmp = acc_s + v
        if fabs(acc_s) >= fabs(v):
            acc_c += (acc_s - tmp) + v
        else:
            acc_c += (v - tmp) + acc_s
        acc_s = tmp
    ctx.gaussian_draws += <unsigned long long>(kg) * <unsigned long long>(ctx.d)
    value = (acc_s + acc_c) / <double>kg

    # Level sums i = 0..n-1 over base**(n-i) children keyed path + (i, k).
    for i in range(n):
        ki = ipow(ctx.base, n - i)
        stl = st0
        absorb(&stl, <uint64_t>i)
        acc_s = 0.0
        acc_c = 0.0
        for k in range(1, ki + 1):
            st = stl
            absorb(&st, <uint64_t>k)
            u = uniform_from_word(word_at(st.h1, st.h2, 0))
            s_time = t + (ctx.T - t) * u
            sc = ctx.scale * sqrt(s_time - t)
            for j in range(ctx.d):
                y[j] = x[j] + sc * gauss_from_word(word_at(st.h1, st.h2, <uint64_t>(1 + j)))
            ctx.path[pfill] = i
            ctx.path[pfill + 1] = k
            vlo = 0.0
            vhi = eval_node(ctx, i, s_time, y, depth + 1)
            if i >= 1:
                ctx.path[pfill] = -i
                vlo = eval_node(ctx, i - 1, s_time, y, depth + 1)
            term = eval_f(ctx, s_time, y, vhi)
            if i >= 1:
                term -= eval_f(ctx, s_time, y, vlo)
            tmp = acc_s + term
            if fabs(acc_s) >= fabs(term):
                acc_c += (acc_s - tmp) + term
            else:
                acc_c += (term - tmp) + acc_s
            acc_s = tmp
        ctx.uniform_draws += <unsigned long long>ki
        ctx.gaussian_draws += <unsigned long long>(ki) * <unsigned long long>(ctx.d)
        value += (ctx.T - t) * ((acc_s + acc_c) / <double>ki)

    return value


def mlp_estimate(
    x,
    double t,
    double T,
    int n,
    long long base,
    double diffusion_scale,
    int fcode,
    double fa,
    double fb,
    object fpy,
    int gcode,
    double ga,
    object gpy,
    unsigned long long root_seed,
    path_prefix,
):
    """One realization of U_n(t, x); returns (value, f, g, uniform, gauss) counts."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef int d = xv.shape[0]
    cdef EvalCtx ctx
    cdef double value
    cdef int j
    cdef bint pure_c

    ctx.base = base
    ctx.T = T
    ctx.d = d
    ctx.scale = diffusion_scale
    ctx.fcode = fcode
    ctx.fa = fa
    ctx.fb = fb
    ctx.fpy = <PyObject*>fpy
    ctx.gcode = gcode
    ctx.ga = ga
    ctx.gpy = <PyObject*>gpy
    ctx.root = root_seed
    ctx.f_evals = 0
    ctx.g_evals = 0
    ctx.uniform_draws = 0
    ctx.gaussian_draws = 0

    if n <= 0:
        return 0.0, 0, 0, 0, 0

    prefix = np.asarray(list(path_prefix), dtype=np.int64)
    cdef int64_t[::1] pview
    path_buf = np.empty(prefix.shape[0] + 2 * (n + 1), dtype=np.int64)
    path_buf[: prefix.shape[0]] = prefix
    pview = path_buf
    ctx.prefix_len = prefix.shape[0]
    ctx.path = &pview[0] if pview.shape[0] > 0 else NULL

    ybuf = np.empty((n + 1) * d, dtype=np.float64)
    cdef double[::1] yview = ybuf
    ctx.ybuf = &yview[0]

    pure_c = fcode in (F_CONST, F_LINEAR, F_COS) and gcode in (G_CONST, G_NORMSQ)
    if pure_c:
        with nogil:
            value = eval_node(&ctx, n, t, &xv[0], 0)
    else:
        value = eval_node(&ctx, n, t, &xv[0], 0)

    return value, ctx.f_evals, ctx.g_evals, ctx.uniform_draws, ctx.gaussian_draws


def mix64(z):
    return int(c_mix64(<uint64_t>(int(z) & 0xFFFFFFFFFFFFFFFF)))


def derive_key(root_seed, path):
    """128-bit stream key for (root_seed, path); length-prefixed absorb."""
    cdef KeyState st
    init_state(&st, <uint64_t>(int(root_seed) & 0xFFFFFFFFFFFFFFFF))
    absorb(&st, <uint64_t>len(path))
    for e in path:
        absorb(&st, <uint64_t>(int(e) & 0xFFFFFFFFFFFFFFFF))
    return int(st.h1), int(st.h2)


def raw_words(h1, h2, start, count):
    """Output words start..start+count-1 of the keyed counter stream."""
    cdef uint64_t ch1 = <uint64_t>(int(h1) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t ch2 = <uint64_t>(int(h2) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s = <uint64_t>int(start)
    cdef Py_ssize_t m = int(count), i
    out = np.empty(m, dtype=np.uint64)
    cdef uint64_t[::1] ov = out
    for i in range(m):
        ov[i] = word_at(ch1, ch2, s + <uint64_t>i)
    return out


def uniforms_from_key(h1, h2, start, count):
    cdef uint64_t ch1 = <uint64_t>(int(h1) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t ch2 = <uint64_t>(int(h2) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s = <uint64_t>int(start)
    cdef Py_ssize_t m = int(count), i
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(m):
            ov[i] = uniform_from_word(word_at(ch1, ch2, s + <uint64_t>i))
    return out


def gaussians_from_key(h1, h2, start, count):
    cdef uint64_t ch1 = <uint64_t>(int(h1) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t ch2 = <uint64_t>(int(h2) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t s = <uint64_t>int(start)
    cdef Py_ssize_t m = int(count), i
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] ov = out
    with nogil:
        for i in range(m):
            ov[i] = gauss_from_word(word_at(ch1, ch2, s + <uint64_t>i))
    return out

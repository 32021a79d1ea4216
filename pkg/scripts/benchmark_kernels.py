#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Runs the same estimator realizations through both kernels, checks the
values agree bit-for-bit, and reports wall time plus speedup.

Usage: python scripts/benchmark_kernels.py [--heavy]
"""

import argparse
import math
import time

import numpy as np

from mlpicard import _pykernel

try:
    from mlpicard import _mlpcore
except ImportError:
    _mlpcore = None


def run_case(impl, n, base, d, fcode, gcode, reps):
    x = np.zeros(d)
    t0 = time.perf_counter()
    vals = []
    for rep in range(reps):
        out = impl.mlp_estimate(
            x, 0.0, 1.0, n, base, math.sqrt(2.0),
            fcode, 1.0, 0.0, None, gcode, 0.0, None, 1234, (rep,),
        )
        vals.append(out[0])
    return time.perf_counter() - t0, vals


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--heavy", action="store_true",
                        help="add a larger configuration (slower)")
    args = parser.parse_args()

    if _mlpcore is None:
        print("compiled kernel not built; nothing to compare")
        return 1

    cases = [
        ("n=2 base=3 d=5  f=cos g=|x|^2", 2, 3, 5, _pykernel.F_COS, _pykernel.G_NORMSQ, 50),
        ("n=3 base=3 d=10 f=cos g=|x|^2", 3, 3, 10, _pykernel.F_COS, _pykernel.G_NORMSQ, 10),
        ("n=4 base=2 d=20 f=lin g=|x|^2", 4, 2, 20, _pykernel.F_LINEAR, _pykernel.G_NORMSQ, 5),
    ]
    if args.heavy:
        cases.append(
            ("n=4 base=3 d=20 f=cos g=|x|^2", 4, 3, 20, _pykernel.F_COS, _pykernel.G_NORMSQ, 3)
        )

    print(f"{'configuration':34s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}  match")
    for label, n, base, d, fcode, gcode, reps in cases:
        t_c, v_c = run_case(_mlpcore, n, base, d, fcode, gcode, reps)
        t_p, v_p = run_case(_pykernel, n, base, d, fcode, gcode, reps)
        match = "yes" if v_c == v_p else "NO"
        print(
            f"{label:34s} {t_c / reps * 1e3:8.2f}ms {t_p / reps * 1e3:8.2f}ms "
            f"{t_p / t_c:7.1f}x  {match}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

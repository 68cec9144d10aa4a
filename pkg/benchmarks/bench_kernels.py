"""Timing comparison of the compiled and pure-Python inner loops.

Runs the u-recurrence and the incremental v accumulation on realistic
problem sizes with both backends and prints a small table. Usage:

    python3 benchmarks/bench_kernels.py [--sizes 1500,6000,12000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from crowsim._core import _kernels_py

try:
    from crowsim._core import _kernels as _kernels_cy
except ImportError:
    _kernels_cy = None


def _problem(n, rng):
    # Shapes and magnitudes mirror a real solve: decaying oscillatory
    # moment tables and a kernel table with |g| ~ xi0^2.
    t = np.arange(n + 1) * (8.0 / n)
    phase = np.exp(-1j * 50.25 * t)
    p = 0.01 * phase * np.exp(-0.3 * t) * (1 + 0.1 * rng.standard_normal(n + 1))
    q = 0.01 * phase * np.exp(-0.25 * t) * (1 + 0.1 * rng.standard_normal(n + 1))
    u = phase * np.exp(-0.2 * t)
    gt = 1.5 * phase * np.exp(-0.5 * t)
    return p, q, u, gt


def _time(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sizes", default="1500,6000,12000")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(7)

    if _kernels_cy is None:
        print("compiled extension not available; timing pure Python only")
    header = f"{'kernel':<14}{'n':>8}{'python':>12}{'cython':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        p, q, u, gt = _problem(n, rng)
        cases = [
            ("u_recurrence", lambda m: m.u_recurrence(p, q)),
            ("v_accumulate", lambda m: m.v_accumulate(u, gt, np.conj(gt), 8.0 / n)),
        ]
        for name, run in cases:
            t_py, ref = _time(run, _kernels_py, repeat=args.repeat)
            if _kernels_cy is not None:
                t_cy, got = _time(run, _kernels_cy, repeat=args.repeat)
                err = float(np.max(np.abs(got - ref)))
                assert err < 1e-10, f"backend mismatch {err:g}"
                print(
                    f"{name:<14}{n:>8}{t_py * 1e3:>10.2f}ms{t_cy * 1e3:>10.2f}ms"
                    f"{t_py / t_cy:>8.1f}x"
                )
            else:
                print(f"{name:<14}{n:>8}{t_py * 1e3:>10.2f}ms{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()

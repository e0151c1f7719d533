"""Time the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--n 2000] [--repeat 5] [--end-to-end]

Kernel timings call both implementations in one process.  ``--end-to-end``
also times a full entropy-rate estimate in two subprocesses, one with
``ERSATZ_DISABLE_NUMBA=1``.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from ersatz import _accel, _kernels


def best_of(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(n, k):
    rng = np.random.default_rng(0)
    # a random walk in time order, as the estimators query it
    walk = np.cumsum(rng.standard_normal(n * 20))
    xs = np.sort(walk)
    pts = np.ascontiguousarray(rng.standard_normal((n, 3)))
    radius = _kernels._brute_knn_radius_np(pts, k)
    # radii in the walk's time order
    r1 = _kernels._knn_radius_1d_np(xs, k)[np.argsort(np.argsort(walk))]
    return [
        ("knn_radius_1d", f"N={xs.size}", lambda f: f(xs, k), "_knn_radius_1d"),
        ("count_within_1d", f"N={xs.size}", lambda f: f(xs, walk, r1), "_count_within_1d"),
        ("brute_knn_radius", f"N={n}, d=3", lambda f: f(pts, k), "_brute_knn_radius"),
        ("brute_count_within", f"N={n}, d=3", lambda f: f(pts, radius), "_brute_count_within"),
    ]


END_TO_END = (
    "import time; from ersatz.synthesis import NoiseSpec, synth_motion;"
    "from ersatz.estimators import ersatz_entropy_rate;"
    "x = synth_motion(NoiseSpec(length=2**{p}, seed=1)); ersatz_entropy_rate(x);"
    "t = time.perf_counter(); v = ersatz_entropy_rate(x, 2).value;"
    "print(time.perf_counter() - t, v)"
)


def end_to_end(power):
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, ERSATZ_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", END_TO_END.format(p=power)], env=env,
                             capture_output=True, text=True, check=True)
        secs, value = res.stdout.split()
        out[label] = (float(secs), float(value))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="points for the brute-force kernels")
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    ap.add_argument("--power", type=int, default=14, help="log2 of the end-to-end series length")
    args = ap.parse_args(argv)

    if not _accel.HAS_NUMBA:
        print("numba is not installed; only the numpy path can be timed")
    print(f"{'kernel':<20} {'size':<14} {'numba [ms]':>11} {'numpy [ms]':>11} {'speed-up':>9}")
    for name, size, call, attr in kernel_cases(args.n, args.k):
        t_np = best_of(lambda: call(getattr(_kernels, attr + "_np")), args.repeat)
        if _accel.HAS_NUMBA:
            t_nb = best_of(lambda: call(getattr(_kernels, attr + "_nb")), args.repeat)
            print(f"{name:<20} {size:<14} {1e3 * t_nb:>11.2f} {1e3 * t_np:>11.2f} {t_np / t_nb:>8.1f}x")
        else:
            print(f"{name:<20} {size:<14} {'-':>11} {1e3 * t_np:>11.2f} {'-':>9}")

    if args.end_to_end:
        res = end_to_end(args.power)
        (t_nb, v_nb), (t_np, v_np) = res["numba"], res["numpy"]
        print(f"\nentropy rate m=2, T=2^{args.power}: numba {t_nb:.2f}s, numpy {t_np:.2f}s "
              f"({t_np / t_nb:.1f}x), values {v_nb:.12f} / {v_np:.12f}")


if __name__ == "__main__":
    main()

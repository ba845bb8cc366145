"""Time the compiled kernels against the numpy fallback.

Runs each hot kernel on the same inputs under both backends, checks that the
results agree, and prints the best-of-``repeat`` wall time and the speedup.

    python3 benchmarks/bench_kernels.py --repeat 5
"""
from __future__ import annotations

import argparse
import time
from math import comb

import numpy as np

from polynet import _backend
from polynet.depth import tukey_depth
from polynet.poly_core import PointCloud


def _best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(seed: int):
    rng = np.random.default_rng(seed)
    out = []
    # thresholds off the k/N lattice so float summation order cannot flip a tie
    for N, d in [(24, 3), (30, 4), (20, 5)]:
        rows = rng.standard_normal((N, d))
        w = np.full(N, 1.0 / N)
        total = comb(N, d - 1)
        out.append((f"depth_scan N={N} d={d} ({total} subsets)",
                    lambda k, rows=rows, w=w, total=total:
                    k.depth_scan(rows, w, 0.0, 1e-10, 1e-9, 0, total)[0]))
        X = rng.standard_normal((N, d))
        tot = comb(N, d)
        out.append((f"constraint_scan N={N} d={d} ({tot} subsets)",
                    lambda k, X=X, w=w, tot=tot:
                    len(k.constraint_scan(X, w, 0.55, 1e-10, 1e-9, 0, tot))))
    for m in (10, 20, 40):
        A = rng.standard_normal((m, m))
        A = A + A.T
        out.append((f"jacobi_eigh {m}x{m}",
                    lambda k, A=A: np.round(np.sort(k.jacobi_eigh(A, 100, 1e-14)[0]), 8).tolist()))
    cloud = PointCloud(rng.standard_normal((40, 2)))
    Y = cloud.lift(2)
    q = Y.mean(axis=0)
    out.append(("exact_depth lifted n=2 D=2 N=40",
                lambda k, Y=Y, q=q: round(tukey_depth(q, Y).depth, 12)))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _backend.compiled_available():
        print("compiled kernels are not built; only the python backend can be timed")
    names = ["python"] + (["cython"] if _backend.compiled_available() else [])
    print(f"{'kernel':48s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}  agree")
    for label, fn in cases(args.seed):
        times, results = [], []
        for name in names:
            with _backend.use_backend(name):
                t, r = _best_time(lambda: fn(_backend.get_kernels()), args.repeat)
            times.append(t)
            results.append(r)
        agree = all(np.allclose(r, results[0]) for r in results[1:])
        speed = f"{times[0] / times[-1]:9.1f}x" if len(times) > 1 else f"{'-':>10s}"
        print(f"{label:48s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times) + f"{speed}  {agree}")


if __name__ == "__main__":
    main()

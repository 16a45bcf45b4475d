"""Compare the compiled and numpy curvature kernels.

Run with ``python3 benchmarks/bench_kernels.py [N ...]``. Prints the median
time of each kernel per backend and the largest disagreement between them,
then the time of a full curvature package (which also pays for FFTs).
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from quasieinstein import kernels, zoo


def _median_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _inputs(N: int, n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    P = N**n
    A = rng.standard_normal((n, n, P)) * 0.1
    g = np.einsum("ikp,jkp->ijp", A, A) + np.eye(n)[:, :, None]
    ginv, _ = kernels.python_kernels.metric_inverse(g)
    dg = rng.standard_normal((n, n, n, P))
    dg = 0.5 * (dg + np.swapaxes(dg, 1, 2))
    gam = kernels.python_kernels.christoffel(ginv, dg)
    dgam = rng.standard_normal((n,) + gam.shape)
    return g, ginv, dg, gam, dgam


def bench(N: int, n: int, repeat: int) -> None:
    g, ginv, dg, gam, dgam = _inputs(N, n)
    backends = {"python": kernels.python_kernels}
    if kernels.compiled_kernels is not None:
        backends["cython"] = kernels.compiled_kernels
    cases = {
        "metric_inverse": lambda k: k.metric_inverse(g),
        "christoffel": lambda k: k.christoffel(ginv, dg),
        "ricci": lambda k: k.ricci(gam, dgam),
    }
    print(f"n={n} N={N} nodes={N**n}")
    for name, call in cases.items():
        row, outs = [], {}
        for label, k in backends.items():
            outs[label] = call(k)
            row.append(f"{label} {1e3 * _median_time(lambda: call(k), repeat):8.2f} ms")
        diff = ""
        if len(outs) == 2:
            a, b = (np.concatenate([np.ravel(x) for x in (o if isinstance(o, tuple) else (o,))])
                    for o in outs.values())
            diff = f"max diff {np.max(np.abs(a - b)):.1e}"
        print(f"  {name:<15} " + "  ".join(row) + f"  {diff}")
    t0 = time.perf_counter()
    M = zoo.torus_of_revolution(2.0, 1.0, N)
    M.scalar_curvature()
    print(f"  full curvature package, torus of revolution ({kernels.BACKEND}): "
          f"{1e3 * (time.perf_counter() - t0):.1f} ms")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("N", type=int, nargs="*", default=[32, 64, 128])
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    for N in args.N:
        bench(N, args.dim, args.repeat)


if __name__ == "__main__":
    main()

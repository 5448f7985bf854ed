"""Compiled kernels vs the numpy fallback: agreement and timing.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import time
import timeit
import types

import numpy as np

from despso import _kernels_py, des

try:
    from despso import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

SIZES = [(16, 2), (64, 2), (64, 5), (256, 5)]


def best_time(func, repeat):
    return min(timeit.repeat(func, number=1, repeat=repeat))


def compare_kernel(name, args, repeat):
    a = getattr(compiled, name)(*args)
    b = getattr(_kernels_py, name)(*args)
    a_arr = np.concatenate([np.ravel(v) for v in (a if isinstance(a, tuple) else (a,))])
    b_arr = np.concatenate([np.ravel(v) for v in (b if isinstance(b, tuple) else (b,))])
    err = float(np.max(np.abs(a_arr - b_arr) / np.maximum(np.abs(b_arr), 1e-300)))
    tc = best_time(lambda: getattr(compiled, name)(*args), repeat)
    tp = best_time(lambda: getattr(_kernels_py, name)(*args), repeat)
    return tc, tp, err


def relax_time(backend, n, dim, steps):
    saved = des.kernels
    des.kernels = types.SimpleNamespace(
        energy=backend.energy, energy_forces=backend.energy_forces,
        pair_distances=backend.pair_distances, centered_l2_sq=backend.centered_l2_sq,
    )
    try:
        t = time.perf_counter()
        ps = des.generate_des(n, dim, des.DesConfig(max_steps=steps), seed=0) if steps else None
        return time.perf_counter() - t, ps
    finally:
        des.kernels = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--relax-steps", type=int, default=500)
    args = ap.parse_args()
    if compiled is None:
        raise SystemExit("compiled extension not available; build with pip install -e .")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<15} {'N':>4} {'D':>2} {'cython ms':>10} {'numpy ms':>10} {'ratio':>7} {'max rel err':>12}")
    for n, dim in SIZES:
        x = rng.random((n, dim))
        for name, extra in (("energy_forces", (2.0, 20.0, 1.0)), ("centered_l2_sq", ())):
            tc, tp, err = compare_kernel(name, (x, *extra), args.repeat)
            print(f"{name:<15} {n:>4} {dim:>2} {tc * 1e3:>10.3f} {tp * 1e3:>10.3f} {tp / tc:>7.1f} {err:>12.2e}")

    print()
    print(f"whole relaxation, {args.relax_steps} steps")
    import warnings
    warnings.simplefilter("ignore", des.NotConverged)
    for n, dim in SIZES[:3]:
        tc, pc = relax_time(compiled, n, dim, args.relax_steps)
        tp, pp = relax_time(_kernels_py, n, dim, args.relax_steps)
        diff = float(np.max(np.abs(pc.coords - pp.coords)))
        print(f"N={n:<4} D={dim}  cython {tc:7.3f} s   numpy {tp:7.3f} s   x{tp / tc:5.1f}   max coord diff {diff:.1e}")


if __name__ == "__main__":
    main()

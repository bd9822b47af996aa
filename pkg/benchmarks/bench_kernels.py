"""Time the compiled kernels against the pure-Python reference.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-``repeat`` wall time per call for each backend and the
speed-up.  Also checks that both backends agree on the benchmark inputs.
"""
import argparse
import time

import numpy as np

from jumpsupport import _pykernels, kernels


def euler_case(n=2000, m=2, d=2, n_jumps=20, seed=0):
    rng = np.random.default_rng(seed)
    jump_at = np.full(n + 1, -1)
    nodes = np.sort(rng.choice(np.arange(1, n + 1), size=n_jumps, replace=False))
    jump_at[nodes] = np.arange(n_jumps)
    return dict(times=np.linspace(0.0, 1.0, n + 1), x0=np.ones(m), G=-np.eye(m), h=np.zeros(m),
                S0=np.eye(m, d), S1=np.zeros((m, d, m)), r0=0.0, r1=np.zeros(m), e=np.zeros(m),
                dZ=rng.standard_normal((n, d)) / np.sqrt(n), dR=np.zeros(n), jump_at=jump_at,
                jump_u=rng.standard_normal((n_jumps, d)), jump_upow=np.zeros(n_jumps), cap=1e12)


def rk4_case(n=2000, m=2):
    return dict(x0=np.ones(m), G=np.array([[-1.0, 0.5], [-0.5, -1.0]])[:m, :m], h=np.ones(m), dt=1e-3, n=n)


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if kernels.BACKEND != "cython":
        print("compiled extension not available; only the reference backend would run")
        return
    cases = [("euler_affine", kernels.euler_affine, euler_case()), ("rk4_affine", kernels.rk4_affine, rk4_case())]
    print(f"{'kernel':<14}{'cython [ms]':>14}{'python [ms]':>14}{'speed-up':>10}")
    for name, fn, kw in cases:
        c = fn(**kw)
        p = fn(**kw, impl=_pykernels)
        c, p = (c[0], p[0]) if isinstance(c, tuple) else (c, p)
        if not np.allclose(c, p, rtol=1e-12, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        tc = best_time(lambda: fn(**kw), args.repeat)
        tp = best_time(lambda: fn(**kw, impl=_pykernels), args.repeat)
        print(f"{name:<14}{1e3 * tc:>14.3f}{1e3 * tp:>14.3f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()

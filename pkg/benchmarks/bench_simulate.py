#!/usr/bin/env python3
"""Benchmark the simulation kernels: jit backend vs pure-NumPy fallback.

Both backends consume identical random streams, so the sampled jump chains
match; only throughput differs.  Run from the repository root:

    python benchmarks/bench_simulate.py [--n 200000] [--seed 0]
"""

import argparse
import time

import numpy as np

from qscert import _backend, models
from qscert.montecarlo import SimConfig, feynman_kac, simulate
from qscert.spectral import perron


def time_call(fn, repeat=3):
    best = np.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cases = []
    chain = models.bd_uniform(5)
    p = perron(chain)
    cfg = SimConfig(n_traj=args.n, horizon=30.0 / p.lambda1, seed=args.seed)
    cases.append(("absorbing walk N=5", lambda: simulate(chain, p.nu, cfg)))

    cyc = models.cycle_chain(7)
    mu0 = np.full(7, 1.0 / 7.0)
    fk_cfg = SimConfig(n_traj=args.n, horizon=5.0, seed=args.seed)
    f = np.eye(7)[0]
    cases.append(("weighted paths cycle N=7",
                  lambda: feynman_kac(cyc, mu0, 5.0, f, fk_cfg)))

    rock = models.rock_breaking(6)
    m0 = np.zeros(rock.n)
    m0[-1] = 1.0
    dcfg = SimConfig(n_traj=args.n, horizon=20, seed=args.seed)
    cases.append(("splitting chain n=6 (discrete)", lambda: simulate(rock, m0, dcfg)))

    backends = ["numpy"]
    try:
        _backend.use("numba")
        _backend.kernels()
        backends.append("numba")
    except Exception:
        print("numba backend unavailable; benchmarking numpy only")
    finally:
        _backend.use(None)

    print(f"{args.n} trajectories per case, best of 3 (first numba call compiles)\n")
    header = f"{'case':36s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}"
    print(header)
    print("-" * len(header))
    for name, fn in cases:
        times = {}
        sanity = {}
        for b in backends:
            _backend.use(b)
            fn()                       # warm up (jit compile, caches)
            times[b], out = time_call(fn)
            if hasattr(out, "terminal"):
                sanity[b] = out.terminal.sum()
        _backend.use(None)
        if len(sanity) == 2 and sanity["numpy"] != sanity["numba"]:
            raise AssertionError(f"backend outputs differ for {name}")
        cols = "".join(f"{times[b]*1e3:10.1f}ms" for b in backends)
        speed = f"{times['numpy'] / times['numba']:8.1f}x" if "numba" in times else "       -"
        print(f"{name:36s}{cols}{speed}")


if __name__ == "__main__":
    main()

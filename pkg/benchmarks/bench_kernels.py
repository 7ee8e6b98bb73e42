"""Compiled vs numpy-fallback timings for the hot kernels.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from clebsch import kernels


def cases(rng):
    inv = 1.0 / np.array([0.5, 0.6, 1.0])
    m0 = rng.standard_normal(3)
    Q0 = np.eye(3)
    for n in (8, 64, 256):
        Q = rng.uniform(-10, 10, (n, 1))
        P = rng.standard_normal((n, 1))
        yield f"particle_rhs N={n}", lambda mod, Q=Q, P=P: mod.particle_rhs(Q, P, kernels.PEAKED, 1.0)
    yield "cayley_rb_solve", lambda mod: mod.cayley_rb_solve(m0, inv, 0.1, 1e-13, 50)
    yield "cayley_rb_trajectory 1000 steps", lambda mod: mod.cayley_rb_trajectory(m0, Q0, inv, 0.1, 1000, 1e-13, 50)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    mods = kernels.backends()
    if mods["compiled"] is None:
        print("compiled extension not built; only the python backend is timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':34} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for name, fn in cases(rng):
        times = {}
        for label, mod in mods.items():
            if mod is None:
                continue
            timer = timeit.Timer(lambda: fn(mod))
            number, _ = timer.autorange()
            times[label] = min(timer.repeat(args.repeat, number)) / number
        py = times["python"]
        co = times.get("compiled")
        speed = f"{py / co:8.1f}x" if co else "        -"
        co_s = f"{co * 1e6:10.1f}us" if co else "           -"
        print(f"{name:34} {py * 1e6:10.1f}us {co_s} {speed}")


if __name__ == "__main__":
    main()

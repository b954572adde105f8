"""Compiled vs pure-Python kernel timings.

Runs the same trajectories through both backends (by swapping the functions that
``spingas.kernels`` exports) and reports the largest deviation between them: the
classical event streams agree exactly, amplitudes agree to round-off.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time
from contextlib import contextmanager

import numpy as np

from spingas import kernels
from spingas.classical import BallState, billiard_init, billiard_run
from spingas.engines import Coupling
from spingas.ensemble import InitialState, ModelSpec, TrajectoryPlan, run_trajectory

KERNEL_NAMES = ("apply_eig_block", "ising_apply_pair", "lattice_walk",
                "lattice_xx_run", "lattice_ising_run", "billiard_run")


@contextmanager
def use_backend(backend):
    saved = {name: getattr(kernels, name) for name in KERNEL_NAMES}
    try:
        for name in KERNEL_NAMES:
            setattr(kernels, name, getattr(backend, name))
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def best_of(fn, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def lattice_case(coupling, n, length, steps, initial):
    plan = TrajectoryPlan(ModelSpec("lattice", n, length, placement="random"), Coupling.parse(coupling),
                          1.0, initial=InitialState.parse(initial), steps=steps, seed=1)
    return lambda: run_trajectory(plan, 0).states


def billiard_case(n, box, collisions):
    start = billiard_init(n, 1.0, box, 1.0, 0.32, np.random.default_rng(0))

    def run():
        res = billiard_run(BallState(start.pos, start.vel, start.diameter, start.mass, start.box),
                           collisions)
        return np.array([e.pairs[0] for e in res.events])
    return run


CASES = {
    "lattice XX (N=32, L=48, T=20000)": lattice_case("XX", 32, 48, 20_000, "excitation:1"),
    "lattice XX (N=100, L=150, T=5000)": lattice_case("XX", 100, 150, 5000, "excitation:1"),
    "lattice Ising (N=8, L=16, T=5000)": lattice_case("Ising", 8, 16, 5000, "1" + "0" * 7),
    "billiard (100 balls, box 40, 2000 collisions)": billiard_case(100, 40.0, 2000),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'case':48s} {'compiled [s]':>13s} {'python [s]':>11s} {'speed-up':>9s}  {'max |diff|':>10s}")
    for name, fn in CASES.items():
        with use_backend(kernels.compiled_backend):
            tc, rc = best_of(fn, args.repeat)
        with use_backend(kernels.python_backend):
            tp, rp = best_of(fn, args.repeat)
        diff = float(np.max(np.abs(rc - rp)))
        print(f"{name:48s} {tc:13.4f} {tp:11.4f} {tp / tc:8.1f}x  {diff:10.1e}")


if __name__ == "__main__":
    main()

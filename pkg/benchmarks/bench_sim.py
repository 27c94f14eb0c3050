"""Benchmark: compiled simulation kernel vs the pure-numpy fallback.

Runs the same seeded workload through both backends, checks the outcomes
are bit-identical, and reports throughput.  Usage::

    python benchmarks/bench_sim.py [--trials 200000] [--n 8]
"""

import argparse
import time

import numpy as np

from kronmeet import available_backends, equal_neighbor, make_ring, simulate_meeting


def run(backend: str, chains, trials: int) -> tuple[float, np.ndarray]:
    Pp, Pe = chains
    start = time.perf_counter()
    batch = simulate_meeting(Pp, Pe, 0, 1, trials=trials, seed=42, backend=backend)
    elapsed = time.perf_counter() - start
    return elapsed, batch.times


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--n", type=int, default=8, help="ring size")
    args = parser.parse_args()

    G = make_ring(args.n)
    rw = equal_neighbor(G)
    chains = (rw, rw)

    backends = available_backends()
    print(f"workload: ring-{args.n} equal-neighbour walkers, "
          f"{args.trials} trials from pair (1, 2)")
    results = {}
    for backend in backends:
        elapsed, times = run(backend, chains, args.trials)
        results[backend] = (elapsed, times)
        steps = int(times[times > 0].sum())
        print(f"  {backend:<7} {elapsed:8.3f} s   "
              f"{steps / max(elapsed, 1e-9) / 1e6:8.2f} M steps/s   "
              f"mean={times[times > 0].mean():.4f}")
    if len(results) == 2:
        (t_c, x_c), (t_p, x_p) = results["cython"], results["python"]
        identical = bool((x_c == x_p).all())
        print(f"  identical outcomes: {identical}   speedup: {t_p / t_c:.1f}x")
        if not identical:
            raise SystemExit("backend mismatch: outcomes differ")


if __name__ == "__main__":
    main()

"""Throughput of the compiled simulation core against the pure-Python loop.

    python benchmarks/bench_simulator.py [--n 20000] [--repeat 3] [--workers 1]

Both backends consume the same counter-based streams, so the benchmark also
checks that they return bit-identical lifetimes.
"""

import argparse
import sys
import timeit

import numpy as np

from duo_standby import simulator
from duo_standby.transform import SystemModel

MODELS = {
    "all exp(1)": SystemModel.from_literals("exp(1)", "exp(1)", "exp(1)", "exp(1)"),
    "gamma/weibull/uniform": SystemModel.from_literals(
        "gamma(0.5,1)", "gamma(3.5,2)", "weibull(1.5,1)", "uniform(0.1,3)"),
    "long-lived exp": SystemModel.from_literals("exp(1)", "exp(1)", "exp(20)", "exp(20)"),
}


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000, help="replications per timing")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    backends = simulator.available_backends()
    if "compiled" not in backends:
        print("compiled core not built; only the Python backend is available", file=sys.stderr)

    print(f"{'model':<24}{'backend':<10}{'seconds':>10}{'lifetimes/s':>14}{'speedup':>10}")
    for label, model in MODELS.items():
        times, samples = {}, {}
        for backend in backends:
            def go(backend=backend):
                samples[backend] = simulator.simulate_lifetimes(
                    model, args.n, 1, backend=backend, workers=args.workers)
            times[backend] = best_of(go, args.repeat)
        for backend in backends:
            t = times[backend]
            speedup = times["python"] / t
            print(f"{label:<24}{backend:<10}{t:>10.4f}{args.n / t:>14.0f}{speedup:>9.1f}x")
        if len(samples) == 2:
            same = np.array_equal(samples["python"].lifetimes, samples["compiled"].lifetimes)
            print(f"{'':<24}bit-identical: {same}")
            if not same:
                return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

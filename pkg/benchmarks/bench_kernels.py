#!/usr/bin/env python3
"""Benchmark the jitted trade kernels against the pure-Python fallback.

Runs every model's trade loop on both backends, checks the trajectories
are bit-identical, and prints a throughput table.  The fallback is run
on a smaller trade count and extrapolated where it would be too slow.

Usage: python3 benchmarks/bench_kernels.py [--n-agents N] [--n-trades T]
"""
import argparse
import time

import numpy as np

from kinex import (
    Constant,
    Imitation,
    MoneyDependent,
    QuenchedUniform,
    Urn,
    advance,
    new_market,
    substream,
)
from kinex.kernels import available_backends

RULES = [
    ("cc", Constant(0.5)),
    ("ccm", QuenchedUniform()),
    ("selforg", MoneyDependent("increasing", 0.95, 2.0)),
    ("polya", Urn(4, 2, warmup=1_000)),
    ("imitation", Imitation()),
]


def run(rule, backend, n_agents, n_trades, seed=1):
    state = new_market(rule, n_agents, substream(seed, 0))
    start = time.perf_counter()
    advance(state, n_trades, backend=backend)
    return time.perf_counter() - start, state.money


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-agents", type=int, default=1000)
    parser.add_argument("--n-trades", type=int, default=2_000_000)
    parser.add_argument("--fallback-trades", type=int, default=200_000,
                        help="trade count for the pure-Python timing")
    args = parser.parse_args()

    if "numba" not in available_backends():
        print("numba unavailable; nothing to compare")
        return

    print(f"{args.n_agents} agents; jitted loop over {args.n_trades:,} trades,"
          f" fallback over {args.fallback_trades:,} (rates are comparable)\n")
    header = f"{'model':<10} {'numba':>14} {'numpy':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, rule in RULES:
        # warm the jit cache before timing
        run(rule, "numba", args.n_agents, 10_000)
        t_numba, money_numba = run(rule, "numba", args.n_agents, args.n_trades)
        t_numpy, _ = run(rule, "numpy", args.n_agents, args.fallback_trades)

        # equivalence on the shorter run
        _, short_numba = run(rule, "numba", args.n_agents, args.fallback_trades)
        _, short_numpy = run(rule, "numpy", args.n_agents, args.fallback_trades)
        assert np.array_equal(short_numba, short_numpy), f"{name}: backends diverged"

        rate_numba = args.n_trades / t_numba
        rate_numpy = args.fallback_trades / t_numpy
        print(
            f"{name:<10} {rate_numba:>11,.0f}/s {rate_numpy:>11,.0f}/s"
            f" {rate_numba / rate_numpy:>8.0f}x"
        )
    print("\nbackends bit-identical on every model")


if __name__ == "__main__":
    main()

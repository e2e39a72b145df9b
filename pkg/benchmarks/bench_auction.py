"""Time the compiled auction kernel against the pure-Python fallback.

    python benchmarks/bench_auction.py [--markets 10] [--riders 30] [--repeat 3]

Both backends receive the same integer-scaled inputs; their outputs are
compared before any timing is reported.
"""
import argparse
import random
import sys
import timeit
from fractions import Fraction

from carpool import kernels
from carpool._kc_py import run_auction as python_kernel
from carpool.auction import _scaled_inputs, build_auxiliary, default_epsilon, integer_scale
from carpool.generators import random_gamma, random_sp_network
from carpool.network import greedy_route_capacities
from carpool.preferences import MarketInstance, RiderPreferences


def market(rng, n_riders, max_edges):
    net = random_sp_network(rng, max_edges)
    A = rng.choice([2, 3, 4])
    gamma = random_gamma(rng, A)
    riders = [
        RiderPreferences(str(i), Fraction(rng.randint(20, 200), 2), Fraction(rng.randint(0, 6), 2), gamma)
        for i in range(n_riders)
    ]
    return MarketInstance(net, riders, Fraction(rng.randint(0, 2), 2), A)


def kernel_inputs(instance):
    aux = build_auxiliary(greedy_route_capacities(instance.network))
    eps = default_epsilon(instance)
    scale = integer_scale(instance, {l.parent for l in aux}) * eps.denominator
    eta, theta = _scaled_inputs(instance, aux, scale)
    return eta, theta, eps.numerator, 10**9


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--markets", type=int, default=10)
    parser.add_argument("--riders", type=int, default=30)
    parser.add_argument("--edges", type=int, default=10)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args(argv)
    if not kernels.HAVE_COMPILED:
        print("compiled kernel not built; only the fallback is available", file=sys.stderr)
        return 1

    rng = random.Random(args.seed)
    inputs = [kernel_inputs(market(rng, args.riders, args.edges)) for _ in range(args.markets)]
    iterations = 0
    for eta, theta, eps, guard in inputs:
        fast = kernels.run_auction(eta, theta, eps, guard, backend="cython")
        slow = python_kernel(eta, theta, eps, guard)
        if fast != slow:
            print("backends disagree", file=sys.stderr)
            return 1
        iterations += fast[2]

    def run(backend):
        def go():
            for eta, theta, eps, guard in inputs:
                kernels.run_auction(eta, theta, eps, guard, backend=backend)
        return min(timeit.repeat(go, number=1, repeat=args.repeat))

    compiled = run("cython")
    fallback = run("python")
    print(f"{args.markets} markets, {args.riders} riders each, {iterations} auction rounds in total")
    print(f"{'backend':<10}{'seconds':>10}{'rounds/s':>14}")
    for name, secs in (("cython", compiled), ("python", fallback)):
        print(f"{name:<10}{secs:>10.4f}{iterations / secs:>14.0f}")
    print(f"speed-up {fallback / compiled:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

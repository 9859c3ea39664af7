#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Times the three hot paths (chain walk, synthetic model forward, one full
permutation round) on both implementations and prints a comparison table.

    python benchmarks/bench_kernels.py [--instances 2000] [--repeats 7]
"""

import argparse
import time

import numpy as np

from timex import _kernels_numba as knb
from timex import _kernels_numpy as knp
from timex.data import LossKind, TemporalDataset, Window, loss_vector
from timex.perturb import draw_instance_permutation
from timex.rng import substream


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def build_inputs(m, d, length, seed=0):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((m, d, length))
    u = rng.random((m, length))
    z = rng.standard_normal((m, length))
    cdf = np.sort(rng.random((4, 4)), axis=1)
    cdf /= cdf[:, -1:]
    init = np.cumsum(np.full(4, 0.25))
    init /= init[-1]
    mu, sd = rng.uniform(-1, 1, 4), rng.uniform(0.1, 1, 4)
    empty = np.zeros(1)
    k1s = np.full(d, 3, dtype=np.int64)
    k2s = np.full(d, max(3, length - 2), dtype=np.int64)
    aggs = (np.arange(d) % 3).astype(np.int64)
    inters = (np.arange(d) % 3).astype(np.int64)
    weights = np.zeros((d, length))
    for j in range(d):
        w = rng.random(k2s[j] - k1s[j] + 1)
        weights[j, : w.size] = w / w.sum()
    means, sds = rng.uniform(-1, 1, d), rng.uniform(0.5, 2, d)
    coeffs = rng.uniform(-1, 1, d)
    return dict(values=values, u=u, z=z, chain=(cdf, init, mu, sd, empty),
                forward=(k1s, k2s, aggs, weights, inters, means, sds, coeffs))


def bench(mod, inputs, loss, targets, perm, repeats):
    values = inputs["values"]
    u, z = inputs["u"], inputs["z"]
    cdf, init, mu, sd, empty = inputs["chain"]
    forward_args = inputs["forward"]
    length = values.shape[2]

    def walk():
        mod.markov_walk(u, z, 4, max(4, length - 3), cdf, init, mu, sd, empty,
                        cdf, init, mu, sd, empty, False, False)

    def forward():
        mod.synthetic_outputs(values, *forward_args)

    scratch = values.copy()
    window = Window(2, max(2, length // 2))

    def round_trip():
        sl = window.indices
        scratch[:, 0, sl] = values[perm.mapping, 0, sl]
        outputs = mod.synthetic_outputs(scratch, *forward_args)
        losses = mod.quadratic_loss(targets, outputs)
        scratch[:, 0, sl] = values[:, 0, sl]
        return losses.mean()

    return {
        "chain walk": best_of(walk, repeats),
        "model forward": best_of(forward, repeats),
        "permutation round": best_of(round_trip, repeats),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=2000)
    parser.add_argument("--features", type=int, default=10)
    parser.add_argument("--timesteps", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    inputs = build_inputs(args.instances, args.features, args.timesteps)
    targets = inputs["values"][:, 0, 0].copy()
    perm = draw_instance_permutation(args.instances, substream(0, "bench"))

    # warm up JIT compilation before timing
    bench(knb, inputs, LossKind.quadratic(), targets, perm, 1)

    numba_times = bench(knb, inputs, LossKind.quadratic(), targets, perm, args.repeats)
    numpy_times = bench(knp, inputs, LossKind.quadratic(), targets, perm, args.repeats)

    shape = f"{args.instances}x{args.features}x{args.timesteps}"
    print(f"kernel timings, best of {args.repeats}, values {shape}")
    print(f"{'kernel':<20} {'numba (ms)':>12} {'numpy (ms)':>12} {'speedup':>9}")
    for name in numba_times:
        nb, np_ = numba_times[name] * 1e3, numpy_times[name] * 1e3
        print(f"{name:<20} {nb:>12.3f} {np_:>12.3f} {np_ / nb:>8.1f}x")


if __name__ == "__main__":
    main()

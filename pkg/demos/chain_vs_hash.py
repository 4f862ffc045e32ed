"""Check the hashed sketch against its exact probability model.

The number of bits set after n distinct arrivals has a distribution we
can compute exactly by dynamic programming. Running many independently
seeded sketches over the same 500-item stream should reproduce it. The
demo prints both histograms as side-by-side bars so the agreement is
visible without any statistics, then quotes the exact moments.
"""

import numpy as np

from sbitmap.dimensioning import build_rate_table, solve_capacity
from sbitmap.harness import stream_id
from sbitmap.oracle import estimate_moments, exact_fill_distribution
from sbitmap.sketch import SBitmap


def main():
    params = solve_capacity(256, 2000)
    rates = build_rate_table(params)
    n, seeds = 500, 2000

    dist = exact_fill_distribution(n, rates)
    fills = np.empty(seeds, dtype=np.int64)
    sid = stream_id(1, n, 0)
    for seed in range(seeds):
        sketch = SBitmap(params, rates, seed=seed)
        sketch.consume_stream(sid, n)
        fills[seed] = sketch.fill
    observed = np.bincount(fills, minlength=len(dist.probs))

    print(
        "fill after %d distinct items, %d bits: exact model vs %d seeded runs"
        % (n, params.m, seeds)
    )
    print("  %4s %9s %9s  %s" % ("fill", "expected", "observed", "(# = 4 runs)"))
    lo = int(np.argmax(dist.probs > 2e-3))
    hi = len(dist.probs) - 1 - int(np.argmax(dist.probs[::-1] > 2e-3))
    for k in range(lo, hi + 1):
        expected = dist.probs[k] * seeds
        bar_e = "." * round(expected / 4)
        bar_o = "#" * round(observed[k] / 4)
        print("  %4d %9.1f %9d  %s" % (k, expected, observed[k], bar_o or bar_e))

    mean, var = estimate_moments(dist, rates, params.b_max)
    print()
    print("exact estimator moments at n=%d:" % n)
    print("  mean %.4f (unbiased), rel std %.4f (design %.4f)" % (
        mean, var**0.5 / n, params.epsilon))


if __name__ == "__main__":
    main()

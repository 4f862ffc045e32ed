"""Count distinct items in a duplicate-heavy stream, then save and resume.

Feeds half a session's worth of synthetic flow keys (each repeated a few
times), serializes the sketch to its JSON envelope, restores it, and
keeps counting. The restored copy must behave exactly like the original.
"""

import json

from sbitmap.dimensioning import build_rate_table, solve_capacity
from sbitmap.serialize import dumps, loads
from sbitmap.sketch import SBitmap


def main():
    params = solve_capacity(4000, 2**20)
    rates = build_rate_table(params)
    sketch = SBitmap(params, rates, seed=42)
    print(
        "sketch: %d bits, design error %.2f%%, counts up to %d"
        % (params.m, 100 * params.epsilon, params.N)
    )

    n_first, repeats = 30000, 3
    for i in range(n_first):
        for _ in range(repeats):
            sketch.update(b"flow-%08d" % i)
    est = sketch.estimate()
    print(
        "after %d lines (%d distinct): estimate %.0f (off by %+.2f%%), %d bits set"
        % (
            n_first * repeats,
            n_first,
            est.n_hat,
            100 * (est.n_hat / n_first - 1),
            sketch.fill,
        )
    )

    blob = dumps(sketch)
    print("envelope: %d bytes of JSON, keys %s" % (len(blob), sorted(json.loads(blob))))

    resumed = loads(blob)
    n_more = 20000
    for i in range(n_first, n_first + n_more):
        resumed.update(b"flow-%08d" % i)
    n_total = n_first + n_more
    est = resumed.estimate()
    print(
        "resumed and fed %d more: estimate %.0f for %d true (off by %+.2f%%)"
        % (n_more, est.n_hat, n_total, 100 * (est.n_hat / n_total - 1))
    )
    print("saturated: %s" % est.saturated)


if __name__ == "__main__":
    main()

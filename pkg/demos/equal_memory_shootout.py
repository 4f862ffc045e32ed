"""Race four sketches on the same bit budget across a wide range of n.

Every contender gets 3200 bits: the adaptive bitmap uses them as one
bit vector, the register sketches as 640 five-bit registers, and linear
counting as a plain collision bitmap. Linear counting is unbeatable while
the bitmap is sparse but falls apart near its capacity; the register
sketches hold a higher error everywhere; the adaptive bitmap holds its
design error across the whole range.
"""

from sbitmap.dimensioning import solve_capacity
from sbitmap.errors import Saturated
from sbitmap.harness import rrmse_sweep, sketch_factory

KINDS = ("sbitmap", "hyperloglog", "loglog", "linear")


def cell(kind, bits, N, n):
    factory = sketch_factory(kind, bits, N, seed=0)
    try:
        report = rrmse_sweep(factory, [n], replicates=100, seed=0)[0]
    except Saturated:
        return "saturated"
    return "%.2f%%" % (100 * report.rrmse)


def main():
    bits, N = 3200, 2**20
    grid = [4**k for k in range(3, 10)]
    print(
        "equal budget: %d bits each, range up to %d, 100 replicates" % (bits, N)
    )
    print("design error of the adaptive bitmap: %.2f%%" % (
        100 * solve_capacity(bits, N).epsilon))
    print()

    row_fmt = "  %9s" + " %12s" * len(KINDS)
    print(row_fmt % (("n",) + KINDS))
    for n in grid:
        print(row_fmt % ((n,) + tuple(cell(kind, bits, N, n) for kind in KINDS)))
    print()
    print("(empirical relative RMS error; lower is better; linear counting")
    print(" stops once every bucket collides, the others keep an answer)")


if __name__ == "__main__":
    main()

"""Size a bitmap for a counting job and inspect what the solver chose.

Walks the two directions the dimensioning API supports: from a fixed bit
budget to the precision it buys, and from a target error to the bits it
costs. Ends with the analytic memory table comparing the bitmap against
a 5-bit-register HyperLogLog at equal error targets.
"""

from sbitmap.dimensioning import (
    build_rate_table,
    hll_memory_model,
    required_memory,
    solve_capacity,
)


def main():
    print("From a bit budget to a precision")
    print("--------------------------------")
    for m, N in [(1800, 2**20), (4000, 2**20), (8000, 10**6)]:
        params = solve_capacity(m, N)
        print(
            "  %5d bits, range %7d: C=%9.3f  error=%.3f%%  clamp at fill %d"
            % (m, N, params.C, 100 * params.epsilon, params.b_max)
        )

    print()
    print("From a target error to a bit budget")
    print("-----------------------------------")
    for epsilon in (0.01, 0.03, 0.09):
        bits = required_memory(epsilon, 10**6)
        print("  %4.0f%% error over 1e6 items: %6d bits" % (100 * epsilon, bits))

    print()
    print("The learned sampling schedule (first and last rows)")
    print("---------------------------------------------------")
    params = solve_capacity(1800, 2**20)
    rates = build_rate_table(params)
    for k in (1, 2, 3, params.b_max - 1, params.b_max):
        print(
            "  fill %4d: p=%.6f  q=%.6f  estimate t=%12.2f"
            % (k, rates.p[k], rates.q[k], rates.t[k])
        )
    print("  (t at the clamp is the largest count the sketch will report)")

    print()
    print("Equal-error memory table (bits)")
    print("-------------------------------")
    print("  %8s %10s %10s %10s %7s" % ("error", "range", "bitmap", "registers", "ratio"))
    for epsilon in (0.01, 0.03, 0.09):
        for N in (10**3, 10**5, 10**7):
            sb = required_memory(epsilon, N)
            hll = hll_memory_model(epsilon, N)
            print(
                "  %7.0f%% %10d %10d %10d %7.2f"
                % (100 * epsilon, N, sb, hll, hll / sb)
            )


if __name__ == "__main__":
    main()

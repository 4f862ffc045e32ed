"""Show the design property: relative error stays flat across the range.

Sweeps true cardinalities spanning four orders of magnitude with the same
1800-bit sketch and prints the empirical error next to the design error.
Most sketches trade accuracy at one end of the range for the other; here
the whole point is that the ratio stays near 1 everywhere.
"""

from sbitmap.dimensioning import solve_capacity
from sbitmap.harness import invariance_report, rrmse_sweep, sketch_factory


def main():
    m, N = 1800, 2**20
    epsilon = solve_capacity(m, N).epsilon
    grid = [4**k for k in range(2, 10)]
    print(
        "sweeping n in %s with %d bits (design error %.2f%%), 100 replicates"
        % (grid, m, 100 * epsilon)
    )
    reports = rrmse_sweep(
        sketch_factory("sbitmap", m, N, seed=0), grid, replicates=100, seed=0
    )
    print("  %9s %10s %10s %8s" % ("n", "mean est", "rrmse", "vs design"))
    for rep in reports:
        print(
            "  %9d %10.1f %9.2f%% %8.2f"
            % (rep.n, rep.mean_estimate, 100 * rep.rrmse, rep.rrmse / epsilon)
        )

    summary = invariance_report(reports)
    worst_z = max(abs(z) for z in summary.z_scores)
    print()
    print(
        "flatness over n >= 100: max/min error ratio %.3f, worst |z| = %.2f"
        % (summary.max_min_ratio, worst_z)
    )
    print("(z measures deviation from the design error in standard-error units)")


if __name__ == "__main__":
    main()

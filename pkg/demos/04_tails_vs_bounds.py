"""Monte Carlo hitting times against the tail bounds.

With p = C/n the hitting time V scales like p^-2.  Sample V and compare its
tails at alpha p^-2 with the exponential upper bound and the 2 alpha lower-tail
bound.  The exponential bound carries large constants, so at this size it is
still 1 except far out in the tail.  Takes about a minute on one core.

Run: python demos/04_tails_vs_bounds.py [n] [trials]
"""

import sys

from mirrorcyl import ModelParams, RunSpec, bound_b, geometric_comparison_cdf, run_batch, tail_bound_a
from mirrorcyl.chain import alpha_threshold
from mirrorcyl.stats import wilson_interval

n = int(sys.argv[1]) if len(sys.argv) > 1 else 20
trials = int(sys.argv[2]) if len(sys.argv) > 2 else 4000
C = 1.0
p = C / n

for model in ("mirror", "manhattan"):
    batch = run_batch(RunSpec(model, ModelParams(n, p, C), trials, master_seed=7))
    print(f"\n{model}, n={n}, p={p:.3f}, {trials} trials, {batch.censor_count} censored")
    print(f"  mean V * p^2 = {batch.hitting_time.mean() * p * p:.3f}")
    print("  alpha    P[V>=a/p^2]   upper bound   P[V<=a/p^2]   2a     geometric")
    for alpha in (0.05, 0.2, 1.0, 4.0, 8 * 2.718281828 * 2):
        x = alpha_threshold(alpha, p)
        up = wilson_interval(int(batch.tail_counts([x])[0]), trials)
        lo = wilson_interval(int(batch.cdf_counts([x])[0]), trials)
        print(f"  {alpha:6.2f}   {up.point:.4f}        {min(1.0, tail_bound_a(model, alpha, C)):.4f}"
              f"        {lo.point:.4f}        {bound_b(alpha):.2f}   {geometric_comparison_cdf(alpha, p):.4f}")

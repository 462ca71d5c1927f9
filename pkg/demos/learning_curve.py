"""Learning curve for choosing the better of an item and a bundle pricing.

For growing sample sizes, runs empirical revenue maximization on fresh
samples and reports how much expected revenue the learned pricing loses
against the best pricing in hindsight.
"""

import numpy as np

from simpleauctions import (Discrete, RevenueEvaluator, additive_dist, draw_samples,
                            erm_item_or_bundle, exact_brev_prev)

dist = additive_dist([Discrete.uniform_over(range(1, 11))] * 2, 10)
ev = RevenueEvaluator.from_distribution(dist)
bench = exact_brev_prev(ev)
target = max(bench.brev, bench.prev)
print(f"best in hindsight: max(BRev={bench.brev:.4f}, PRev={bench.prev:.4f}) = {target:.4f}")
for m in (5, 20, 80, 320, 1280):
    gaps = []
    for trial in range(20):
        res = erm_item_or_bundle(draw_samples(dist, 1, m, seed=1000 * m + trial))
        gaps.append(target - ev.revenue(res.chosen))
    print(f"m={m:5d}  mean gap={np.mean(gaps):.4f}  worst gap={np.max(gaps):.4f}")

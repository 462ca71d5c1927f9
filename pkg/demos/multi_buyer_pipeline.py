"""Several additive buyers: the restricted pricing pipeline versus a plain
second-price item auction, both learned from samples and scored exactly."""

from simpleauctions import (Discrete, RevenueEvaluator, additive_dist, draw_samples,
                            erm_multi_additive_pipeline)

n = 2
dists = [additive_dist([Discrete.uniform_over([1, 4]), Discrete.uniform_over([2, 3])], 4),
         additive_dist([Discrete.uniform_over([0, 5]), Discrete.uniform_over([1, 2])], 5)]
ev = RevenueEvaluator.from_distribution(dists, n)
for m in (10, 100, 1000):
    res = erm_multi_additive_pipeline(draw_samples(dists, n, m, seed=m))
    d = res.details
    print(f"m={m:5d}  sample: composed={d['composed_revenue']:.4f} "
          f"second-price={d['second_price_revenue']:.4f}  "
          f"deployed={type(res.chosen).__name__}  true revenue={ev.revenue(res.chosen):.4f}")

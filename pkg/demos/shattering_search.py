"""Looking for large sample sets that a pricing class shatters.

A shattered set of size d certifies that the class's pseudo-dimension is at
least d.  The search draws candidate sets and checks every labeling.
"""

from simpleauctions import Discrete, additive_dist, labeling_count, pd_lower_bound_search

dist = additive_dist([Discrete.uniform_over(range(1, 9))] * 2, 8)
for cls in ("ANON_BUNDLE", "ANON_ITEM"):
    res = pd_lower_bound_search(cls, dist, max_m=4, budget=2000, seed=3)
    print(f"{cls:12s} shattered size found: {res.size}  (candidates used {res.candidates_used})")
    if res.instance is not None:
        print(f"{'':12s} witnesses: {res.instance.witnesses}")
        print(f"{'':12s} distinct purchase patterns: {labeling_count(cls, res.instance.samples)}")

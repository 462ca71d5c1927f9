"""How far the best simple pricing falls short of the optimal mechanism.

Draws small random product type spaces for one additive buyer, solves the
lottery-menu LP for the optimal revenue, and compares it with the best
grand-bundle price and the best item pricing.
"""

import numpy as np

from simpleauctions import Discrete, FiniteTypeSpace, additive_dist, verify_approx_factor

rng = np.random.default_rng(11)
worst = 0.0
for trial in range(12):
    marginals = []
    for _ in range(2):
        vals = sorted(rng.choice(np.arange(1, 11), size=2, replace=False).tolist())
        probs = rng.dirichlet(np.ones(2)).tolist()
        marginals.append(Discrete(tuple(zip(vals, probs))))
    ts = FiniteTypeSpace.from_distribution(additive_dist(marginals, 10))
    rep = verify_approx_factor(ts, factor=6.0)
    worst = max(worst, rep["ratio"])
    print(f"trial {trial:2d}  Rev={rep['rev']:.4f}  BRev={rep['brev']:.4f}  "
          f"PRev={rep['prev']:.4f}  ratio={rep['ratio']:.4f}  ok={rep['factor_ok']}")
print(f"largest Rev / max(BRev, PRev) seen: {worst:.4f}")

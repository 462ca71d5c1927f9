"""Exact optimal revenue for one buyer with finitely many types.

The optimum over all incentive-compatible, individually rational
mechanisms is a linear program over lottery menus: each type ``t`` gets a
probability ``q[t, S]`` for every nonempty bundle ``S`` (the rest of the
mass is "nothing") and a payment ``p[t]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .learners import RevenueEvaluator, exact_brev_prev
from .simplex import simplex_max
from .valuations import (ADDITIVE, UNIT_DEMAND, Additive, BundleTable, UnitDemand, ValuationError,
                         ValuationProfile, bundle_value, support_profiles)

MAX_TYPES = 64
MAX_ITEMS = 4


@dataclass(frozen=True)
class FiniteTypeSpace:
    types: tuple  # ((valuation, probability), ...)
    k: int

    def __post_init__(self):
        types = tuple((v, float(p)) for v, p in self.types)
        if not types:
            raise ValuationError("empty type space")
        if len(types) > MAX_TYPES:
            raise ValuationError(f"at most {MAX_TYPES} types, got {len(types)}")
        if self.k > MAX_ITEMS:
            raise ValuationError(f"at most {MAX_ITEMS} items, got {self.k}")
        if any(v.k != self.k for v, _ in types):
            raise ValuationError("type valuations disagree with k")
        if any(p < 0 for _, p in types):
            raise ValuationError("negative probability")
        total = math.fsum(p for _, p in types)
        if abs(total - 1) > 1e-12:
            raise ValuationError(f"type probabilities sum to {total!r}")
        object.__setattr__(self, "types", tuple((v, p / total) for v, p in types))

    @classmethod
    def from_distribution(cls, dist) -> "FiniteTypeSpace":
        """Cross product of the per-item supports, identical types merged."""
        merged: dict = {}
        for prof, prob in support_profiles(dist, 1):
            merged[prof[0]] = merged.get(prof[0], 0.0) + prob
        return cls(tuple(merged.items()), dist.k)

    def evaluator(self) -> RevenueEvaluator:
        return RevenueEvaluator([ValuationProfile((v,)) for v, _ in self.types],
                                [p for _, p in self.types], True)

    def independence(self) -> bool | None:
        """Whether the item values are independent (None for bundle tables)."""
        vals = [v for v, _ in self.types]
        if not all(isinstance(v, (Additive, UnitDemand)) for v in vals):
            return None
        probs = dict()
        for v, p in self.types:
            probs[v.values] = probs.get(v.values, 0.0) + p
        marg = [dict() for _ in range(self.k)]
        for xs, p in probs.items():
            for j, x in enumerate(xs):
                marg[j][x] = marg[j].get(x, 0.0) + p
        if math.prod(len(m) for m in marg) != len(probs):
            return False
        return all(abs(p - math.prod(marg[j][x] for j, x in enumerate(xs))) <= 1e-12
                   for xs, p in probs.items())

    def to_json(self) -> dict:
        v0 = self.types[0][0]
        return {"k": self.k, "tag": v0.tag,
                "types": [{"values": list(v.values), "p": p} for v, p in self.types]}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteTypeSpace":
        k, tag = data["k"], data["tag"]
        make = {ADDITIVE: lambda xs: Additive(tuple(xs)),
                UNIT_DEMAND: lambda xs: UnitDemand(tuple(xs)),
                "table": lambda xs: BundleTable(tuple(xs), k)}[tag]
        return cls(tuple((make(t["values"]), t["p"]) for t in data["types"]), k)


@dataclass(frozen=True)
class Menu:
    """Optimal menu: ``lotteries[t][S]`` for nonempty bundle masks ``S``
    (index ``S - 1``) and ``payments[t]``."""

    lotteries: np.ndarray
    payments: np.ndarray

    def utility(self, ts: FiniteTypeSpace, t: int, choice: int) -> float:
        v = ts.types[t][0]
        gain = math.fsum(q * bundle_value(v, s + 1) for s, q in enumerate(self.lotteries[choice]))
        return gain - self.payments[choice]


def _menu_lp(ts: FiniteTypeSpace):
    T, nb = len(ts.types), (1 << ts.k) - 1
    # columns: q[t, s] (T*nb), then p_plus[t] (T), then p_minus[t] (T)
    nq = T * nb
    nvar = nq + 2 * T
    values = np.array([[bundle_value(v, s + 1) for s in range(nb)] for v, _ in ts.types])

    def row_for(t_report, t_true, sign):
        row = np.zeros(nvar)
        row[t_report * nb:(t_report + 1) * nb] += sign * values[t_true]
        row[nq + t_report] -= sign
        row[nq + T + t_report] += sign
        return row

    rows, rhs = [], []
    for t in range(T):
        for s in range(T):
            if s != t:
                # utility from misreporting s minus truthful utility <= 0
                rows.append(row_for(s, t, 1.0) + row_for(t, t, -1.0))
                rhs.append(0.0)
        rows.append(row_for(t, t, -1.0))
        rhs.append(0.0)
        feas = np.zeros(nvar)
        feas[t * nb:(t + 1) * nb] = 1.0
        rows.append(feas)
        rhs.append(1.0)
    probs = np.array([p for _, p in ts.types])
    c = np.concatenate([np.zeros(nq), probs, -probs])
    return c, np.array(rows), np.array(rhs), nb


@dataclass(frozen=True)
class OracleResult:
    value: float
    menu: Menu
    pivots: int


def lp_optimal_revenue(ts: FiniteTypeSpace, exact: bool = False) -> OracleResult:
    """Optimal expected revenue over all IC/IR lottery menus."""
    c, A, b, nb = _menu_lp(ts)
    sol = simplex_max(c, A, b, exact=exact)
    T = len(ts.types)
    q = sol.x[:T * nb].reshape(T, nb)
    pay = sol.x[T * nb:T * nb + T] - sol.x[T * nb + T:]
    return OracleResult(sol.value, Menu(q, pay), sol.pivots)


def menu_violation(ts: FiniteTypeSpace, menu: Menu) -> float:
    """Largest IC, IR or feasibility violation of a menu (0 if none)."""
    T = len(ts.types)
    worst = 0.0
    for t in range(T):
        truthful = menu.utility(ts, t, t)
        worst = max(worst, -truthful)
        for s in range(T):
            worst = max(worst, menu.utility(ts, t, s) - truthful)
        worst = max(worst, menu.lotteries[t].sum() - 1, -menu.lotteries[t].min())
    return worst


def verify_approx_factor(ts: FiniteTypeSpace, factor: float, tol: float = 1e-8) -> dict:
    """Check ``factor * max(BRev, PRev) >= Rev`` (within ``tol``).

    The report also carries the revenue-reduced benchmark and whether the
    type space is a product over items, which the guarantee presupposes.
    """
    rev = lp_optimal_revenue(ts).value
    bench = exact_brev_prev(ts.evaluator())
    simple = max(bench.brev, bench.prev)
    return {
        "rev": rev,
        "brev": bench.brev,
        "prev": bench.prev,
        "reduced_prev": bench.reduced_prev,
        "factor": factor,
        "factor_ok": factor * simple >= rev - tol,
        "ratio": rev / simple if simple > 0 else (1.0 if rev <= tol else math.inf),
        "independent_items": ts.independence(),
    }

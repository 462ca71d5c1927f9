"""Utility-maximizing purchases against posted prices.

Ties are resolved in favor of the bundle with the larger total price, then
the lexicographically smallest bundle (sorted item indices).  Comparisons
are exact; buying at zero utility is allowed.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

from .valuations import Additive, BundleTable, UnitDemand, bundle_of, items_of, mask_of

INF = math.inf


class Purchase(NamedTuple):
    bundle: frozenset
    utility: float
    paid: float


EMPTY = Purchase(frozenset(), 0.0, 0.0)


def _avail_mask(available, k: int) -> int:
    if available is None:
        return (1 << k) - 1
    if isinstance(available, int):
        return available
    return mask_of(available)


def _purchase(v, prices, items: Sequence[int]) -> Purchase:
    paid = math.fsum(prices[i] for i in items)
    if isinstance(v, BundleTable):
        value = v.values[mask_of(items)]
    elif isinstance(v, Additive):
        value = math.fsum(v.values[i] for i in items)
    else:
        value = max((v.values[i] for i in items), default=0.0)
    return Purchase(frozenset(items), value - paid, paid)


def best_bundle(v, prices: Sequence[float], available=None) -> Purchase:
    """The bundle ``v`` buys from ``available`` at item prices ``prices``.

    ``available`` may be an iterable of item indices or a bitmask; ``None``
    means every item.  A price of ``inf`` marks an item as not for sale.
    """
    k = v.k
    if len(prices) != k:
        raise ValueError(f"expected {k} prices, got {len(prices)}")
    avail = _avail_mask(available, k)
    if isinstance(v, Additive):
        chosen = [i for i in items_of(avail) if v.values[i] >= prices[i]]
        return _purchase(v, prices, chosen)
    if isinstance(v, UnitDemand):
        return _unit_demand_choice(v, prices, avail)
    return brute_force_choice(v, prices, avail)


def brute_force_choice(v, prices: Sequence[float], available=None) -> Purchase:
    """Literal enumeration over every subset of the available items."""
    avail = _avail_mask(available, v.k)
    for i in items_of(avail):
        if prices[i] == INF:
            avail &= ~(1 << i)
    best = EMPTY
    best_items: tuple = ()
    sub = avail
    while sub:
        items = items_of(sub)
        cand = _purchase(v, prices, items)
        if (cand.utility > best.utility
                or (cand.utility == best.utility
                    and (cand.paid > best.paid
                         or (cand.paid == best.paid and items < best_items)))):
            best, best_items = cand, items
        sub = (sub - 1) & avail
    return best


def _unit_demand_choice(v: UnitDemand, prices, avail: int) -> Purchase:
    # An optimal nonempty bundle is {a} plus zero-priced items worth at most
    # v(a), where a maximizes v(a) - p(a); see the enumeration in tests.
    items = [i for i in items_of(avail) if prices[i] != INF]
    if not items:
        return EMPTY
    u_star = max(0.0, max(v.values[i] - prices[i] for i in items))
    achievers = [i for i in items if v.values[i] - prices[i] == u_star]
    if not achievers:
        return EMPTY
    p_star = max(prices[a] for a in achievers)
    if u_star == 0.0 and p_star == 0.0:
        return EMPTY
    free = [i for i in items if prices[i] == 0.0]
    best = None
    for a in achievers:
        if prices[a] != p_star:
            continue
        cand = tuple(sorted({a} | {z for z in free if z < a and v.values[z] <= v.values[a]}))
        if best is None or cand < best:
            best = cand
    return _purchase(v, prices, best)


def grand_bundle_choice(v, r: float) -> bool:
    """Whether ``v`` accepts the grand bundle at price ``r``."""
    full = (1 << v.k) - 1
    if isinstance(v, BundleTable):
        total = v.values[full]
    elif isinstance(v, Additive):
        total = math.fsum(v.values)
    else:
        total = max(v.values, default=0.0)
    return total >= r


__all__ = ["Purchase", "best_bundle", "brute_force_choice", "grand_bundle_choice", "bundle_of"]

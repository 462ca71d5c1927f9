"""Reduction of many additive buyers to single-buyer problems.

Each buyer competes against the best rival bid on every item (her
threshold).  Bids that are not strictly above the threshold are zeroed out,
and each buyer then faces her own item or grand-bundle pricing with prices
raised to at least the thresholds, so an item can only ever go to its
strictly highest bidder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .mechanisms import AnonBundle, AnonItem, AuctionOutcome, MechanismError, empirical_revenue
from .valuations import ADDITIVE, ValuationProfile


def _check(profile: ValuationProfile):
    if profile.tag != ADDITIVE:
        raise MechanismError("restricted mechanisms are defined for additive buyers only")
    if profile.n < 2:
        raise MechanismError("thresholds need at least two buyers")


def compute_beta(profile: ValuationProfile) -> tuple:
    """``beta[i][j]`` is the highest bid on item ``j`` among buyers other than ``i``."""
    _check(profile)
    vals = [b.values for b in profile]
    n, k = profile.n, profile.k
    return tuple(
        tuple(max(vals[o][j] for o in range(n) if o != i) for j in range(k))
        for i in range(n))


def modify_bids(profile: ValuationProfile, beta=None) -> tuple:
    """Bids kept only where strictly above the threshold, else 0."""
    if beta is None:
        beta = compute_beta(profile)
    return tuple(
        tuple(v if v > t else 0.0 for v, t in zip(b.values, beta[i]))
        for i, b in enumerate(profile))


def restrict_item_row(prices: Sequence[float], beta_row: Sequence[float]) -> tuple:
    return tuple(max(b, p) for p, b in zip(prices, beta_row))


def restrict_bundle_price(price: float, beta_row: Sequence[float], vbar_row: Sequence[float]) -> float:
    floor = math.fsum(b for b, x in zip(beta_row, vbar_row) if x > 0)
    return max(floor, price)


def _buyer_item_sale(vbar_row, prices, beta_row):
    restricted = restrict_item_row(prices, beta_row)
    # zero modified bids never receive an item, even at a zero price
    items = [j for j, x in enumerate(vbar_row) if x > 0 and x >= restricted[j]]
    return frozenset(items), math.fsum(restricted[j] for j in items)


def _buyer_bundle_sale(vbar_row, price, beta_row):
    wanted = frozenset(j for j, x in enumerate(vbar_row) if x > 0)
    if not wanted:
        return frozenset(), 0.0
    restricted = restrict_bundle_price(price, beta_row, vbar_row)
    if math.fsum(vbar_row) >= restricted:
        return wanted, restricted
    return frozenset(), 0.0


class RestrictedRun(NamedTuple):
    revenue: float
    outcome: AuctionOutcome


def _run_parts(profile: ValuationProfile, parts) -> RestrictedRun:
    _check(profile)
    if len(parts) != profile.n:
        raise MechanismError(f"expected {profile.n} per-buyer pricings, got {len(parts)}")
    beta = compute_beta(profile)
    vbar = modify_bids(profile, beta)
    bundles, pays = [], []
    for i, part in enumerate(parts):
        if isinstance(part, AnonItem):
            if len(part.prices) != profile.k:
                raise MechanismError(f"expected {profile.k} prices for buyer {i}")
            got, paid = _buyer_item_sale(vbar[i], part.prices, beta[i])
        elif isinstance(part, AnonBundle):
            got, paid = _buyer_bundle_sale(vbar[i], part.price, beta[i])
        else:
            raise MechanismError(f"unsupported per-buyer pricing {part!r}")
        bundles.append(got)
        pays.append(paid)
    outcome = AuctionOutcome.from_purchases(profile.k, bundles, pays)
    return RestrictedRun(outcome.revenue, outcome)


def run_restricted_item_pricing(profile: ValuationProfile, rows) -> RestrictedRun:
    return _run_parts(profile, [AnonItem(tuple(r)) for r in rows])


def run_restricted_bundle_pricing(profile: ValuationProfile, prices) -> RestrictedRun:
    return _run_parts(profile, [AnonBundle(r) for r in prices])


@dataclass(frozen=True)
class RestrictedMix:
    """Per-buyer choice of a restricted item pricing (``AnonItem``) or a
    restricted grand-bundle pricing (``AnonBundle``)."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def run(self, profile, order=None) -> AuctionOutcome:
        return _run_parts(profile, self.parts).outcome

    def revenue(self, profile) -> float:
        return _run_parts(profile, self.parts).revenue

    def params(self) -> tuple:
        return tuple(p for part in self.parts for p in part.params())


@dataclass(frozen=True)
class RestrictedIndItem:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(float(p) for p in r) for r in self.rows))

    def as_mix(self) -> RestrictedMix:
        return RestrictedMix(tuple(AnonItem(r) for r in self.rows))

    def run(self, profile, order=None):
        return self.as_mix().run(profile)

    def revenue(self, profile) -> float:
        return self.as_mix().revenue(profile)

    def params(self) -> tuple:
        return tuple(p for r in self.rows for p in r)


@dataclass(frozen=True)
class RestrictedIndBundle:
    prices: tuple

    def __post_init__(self):
        object.__setattr__(self, "prices", tuple(float(p) for p in self.prices))

    def as_mix(self) -> RestrictedMix:
        return RestrictedMix(tuple(AnonBundle(r) for r in self.prices))

    def run(self, profile, order=None):
        return self.as_mix().run(profile)

    def revenue(self, profile) -> float:
        return self.as_mix().revenue(profile)

    def params(self) -> tuple:
        return self.prices


def max_mech(mechs: Sequence, eval_set) -> tuple:
    """Pick the mechanism with the highest mean revenue on ``eval_set``.

    Returns ``(chosen, means)``; ties go to the earliest mechanism.
    """
    if not mechs:
        raise ValueError("max_mech needs at least one mechanism")
    means = [empirical_revenue(m, eval_set) for m in mechs]
    best = max(range(len(mechs)), key=lambda t: (means[t], -t))
    return mechs[best], means

"""Auction formats: posted item and grand-bundle pricings (anonymous or
individualized, with buyers shopping sequentially), second-price item
auctions with optional reserves, and the revenue-reduced item pricing.

Every rule exposes ``run(profile) -> AuctionOutcome`` and
``revenue(profile) -> float``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .demand import best_bundle, grand_bundle_choice
from .valuations import ADDITIVE, UNIT_DEMAND, ValuationProfile, mask_of

INF = math.inf


class MechanismError(ValueError):
    """Rule and profile are incompatible."""


@dataclass(frozen=True)
class AuctionOutcome:
    allocation: tuple  # item -> winning buyer index or None
    payments: tuple
    purchased: tuple  # buyer -> frozenset of items

    @property
    def revenue(self) -> float:
        return math.fsum(self.payments)

    @classmethod
    def from_purchases(cls, k: int, purchased: Sequence[frozenset], payments: Sequence[float]):
        alloc = [None] * k
        for i, bundle in enumerate(purchased):
            for item in bundle:
                if alloc[item] is not None:
                    raise AssertionError(f"item {item} allocated twice")
                alloc[item] = i
        return cls(tuple(alloc), tuple(float(p) for p in payments), tuple(purchased))

    def to_json(self) -> dict:
        return {
            "allocation": list(self.allocation),
            "payments": list(self.payments),
            "revenue": self.revenue,
            "purchased": [sorted(b) for b in self.purchased],
        }


def _order(n: int, order) -> Sequence[int]:
    if order is None:
        return range(n)
    if sorted(order) != list(range(n)):
        raise MechanismError(f"order {order!r} is not a permutation of range({n})")
    return order


def _check_prices(prices, k: int) -> tuple:
    prices = tuple(float(p) for p in prices)
    if len(prices) != k:
        raise MechanismError(f"expected {k} prices, got {len(prices)}")
    if any(math.isnan(p) or p < 0 for p in prices):
        raise MechanismError("prices must be nonnegative")
    return prices


# --------------------------------------------------------------------------
# posted pricings


def run_sequential_item_pricing(profile: ValuationProfile, rows: Sequence[Sequence[float]],
                                order=None) -> AuctionOutcome:
    """Buyers in ``order`` each buy their favorite bundle of what remains."""
    n, k = profile.n, profile.k
    if len(rows) != n:
        raise MechanismError(f"expected {n} price rows, got {len(rows)}")
    remaining = (1 << k) - 1
    purchased = [frozenset()] * n
    payments = [0.0] * n
    for i in _order(n, order):
        choice = best_bundle(profile[i], rows[i], remaining)
        purchased[i] = choice.bundle
        payments[i] = choice.paid
        remaining &= ~mask_of(choice.bundle)
    return AuctionOutcome.from_purchases(k, purchased, payments)


def run_sequential_bundle_pricing(profile: ValuationProfile, prices: Sequence[float],
                                  order=None) -> AuctionOutcome:
    """The first buyer (in ``order``) whose grand-bundle value covers her
    price takes every item."""
    n, k = profile.n, profile.k
    if len(prices) != n:
        raise MechanismError(f"expected {n} bundle prices, got {len(prices)}")
    purchased = [frozenset()] * n
    payments = [0.0] * n
    for i in _order(n, order):
        if grand_bundle_choice(profile[i], prices[i]):
            purchased[i] = frozenset(range(k))
            payments[i] = float(prices[i])
            break
    return AuctionOutcome.from_purchases(k, purchased, payments)


@dataclass(frozen=True)
class AnonItem:
    prices: tuple

    def __post_init__(self):
        object.__setattr__(self, "prices", _check_prices(self.prices, len(self.prices)))

    def run(self, profile, order=None):
        _check_prices(self.prices, profile.k)
        return run_sequential_item_pricing(profile, [self.prices] * profile.n, order)

    def revenue(self, profile) -> float:
        return self.run(profile).revenue

    def params(self) -> tuple:
        return self.prices


@dataclass(frozen=True)
class IndItem:
    rows: tuple

    def __post_init__(self):
        rows = tuple(_check_prices(r, len(r)) for r in self.rows)
        object.__setattr__(self, "rows", rows)

    def run(self, profile, order=None):
        for r in self.rows:
            _check_prices(r, profile.k)
        return run_sequential_item_pricing(profile, self.rows, order)

    def revenue(self, profile) -> float:
        return self.run(profile).revenue

    def params(self) -> tuple:
        return tuple(p for row in self.rows for p in row)


@dataclass(frozen=True)
class AnonBundle:
    price: float

    def __post_init__(self):
        if not self.price >= 0:
            raise MechanismError("bundle price must be nonnegative")
        object.__setattr__(self, "price", float(self.price))

    def run(self, profile, order=None):
        return run_sequential_bundle_pricing(profile, [self.price] * profile.n, order)

    def revenue(self, profile) -> float:
        return self.run(profile).revenue

    def params(self) -> tuple:
        return (self.price,)


@dataclass(frozen=True)
class IndBundle:
    prices: tuple

    def __post_init__(self):
        object.__setattr__(self, "prices", _check_prices(self.prices, len(self.prices)))

    def run(self, profile, order=None):
        return run_sequential_bundle_pricing(profile, self.prices, order)

    def revenue(self, profile) -> float:
        return self.run(profile).revenue

    def params(self) -> tuple:
        return self.prices


# --------------------------------------------------------------------------
# second-price item auctions


class ItemCompetition(NamedTuple):
    winner: tuple
    second: tuple
    win_value: tuple
    second_value: tuple


def item_competition(profile: ValuationProfile) -> ItemCompetition:
    """Highest and second-highest bidder per item; ties go to the lower index."""
    if profile.tag not in (ADDITIVE, UNIT_DEMAND):
        raise MechanismError("item competition needs additive or unit-demand buyers")
    if profile.n < 2:
        raise MechanismError("second-highest bidder undefined for fewer than two buyers")
    vals = profile.matrix()
    winner, second = [], []
    for item in range(profile.k):
        col = vals[:, item]
        w = int(np.argmax(col))
        rest = col.copy()
        rest[w] = -INF
        winner.append(w)
        second.append(int(np.argmax(rest)))
    return ItemCompetition(
        tuple(winner), tuple(second),
        tuple(float(vals[w, i]) for i, w in enumerate(winner)),
        tuple(float(vals[s, i]) for i, s in enumerate(second)),
    )


def _require_additive(profile):
    if profile.tag != ADDITIVE:
        raise MechanismError("second-price item auctions are defined for additive buyers only")


def run_sp_with_reserves(profile: ValuationProfile, reserves: Sequence[Sequence[float]]) -> AuctionOutcome:
    """Item ``j`` goes to its highest bidder ``w`` iff ``v_w(j) >= reserves[w][j]``,
    at price ``max(reserves[w][j], second-highest bid)``."""
    _require_additive(profile)
    comp = item_competition(profile)
    n, k = profile.n, profile.k
    if len(reserves) != n:
        raise MechanismError(f"expected {n} reserve rows, got {len(reserves)}")
    bundles = [set() for _ in range(n)]
    pays = [[] for _ in range(n)]
    for item in range(k):
        w = comp.winner[item]
        res = reserves[w][item]
        if comp.win_value[item] >= res:
            bundles[w].add(item)
            pays[w].append(max(res, comp.second_value[item]))
    return AuctionOutcome.from_purchases(
        k, [frozenset(b) for b in bundles], [math.fsum(p) for p in pays])


def run_second_price(profile: ValuationProfile) -> AuctionOutcome:
    _require_additive(profile)
    return run_sp_with_reserves(profile, [[0.0] * profile.k] * profile.n)


@dataclass(frozen=True)
class SecondPrice:
    def run(self, profile, order=None):
        return run_second_price(profile)

    def revenue(self, profile) -> float:
        return self.run(profile).revenue

    def params(self) -> tuple:
        return ()


@dataclass(frozen=True)
class SPReservesAnon:
    reserves: tuple

    def __post_init__(self):
        object.__setattr__(self, "reserves", _check_prices(self.reserves, len(self.reserves)))

    def run(self, profile, order=None):
        return run_sp_with_reserves(profile, [self.reserves] * profile.n)

    def revenue(self, profile) -> float:
        return self.run(profile).revenue

    def params(self) -> tuple:
        return self.reserves


@dataclass(frozen=True)
class SPReservesInd:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(_check_prices(r, len(r)) for r in self.rows))

    def run(self, profile, order=None):
        return run_sp_with_reserves(profile, self.rows)

    def revenue(self, profile) -> float:
        return self.run(profile).revenue

    def params(self) -> tuple:
        return tuple(p for row in self.rows for p in row)


# --------------------------------------------------------------------------
# revenue-reduced item pricing


def reduced_item_sale(v, prices: Sequence[float]):
    """The unique item whose value clears its price, or None."""
    clearing = [i for i in range(v.k) if v.single(i) >= prices[i]]
    return clearing[0] if len(clearing) == 1 else None


def run_reduced_item_pricing(v, prices: Sequence[float]) -> float:
    """Collect ``p(j)`` only when ``j`` is the one item with ``v({j}) >= p(j)``.

    An accounting rule for scoring pricings on a sample, evaluated on the
    buyer's values directly.
    """
    if len(prices) != v.k:
        raise MechanismError(f"expected {v.k} prices, got {len(prices)}")
    item = reduced_item_sale(v, prices)
    return 0.0 if item is None else float(prices[item])


@dataclass(frozen=True)
class ReducedItem:
    prices: tuple

    def __post_init__(self):
        object.__setattr__(self, "prices", _check_prices(self.prices, len(self.prices)))

    def run(self, profile, order=None):
        if profile.n != 1:
            raise MechanismError("revenue-reduced item pricing scores a single buyer")
        item = reduced_item_sale(profile[0], self.prices)
        if item is None:
            return AuctionOutcome.from_purchases(profile.k, [frozenset()], [0.0])
        return AuctionOutcome.from_purchases(profile.k, [frozenset({item})], [self.prices[item]])

    def revenue(self, profile) -> float:
        return run_reduced_item_pricing(profile[0], self.prices)

    def full(self) -> AnonItem:
        """The ordinary item pricing this reduced pricing stands in for."""
        return AnonItem(self.prices)

    def params(self) -> tuple:
        return self.prices


def empirical_revenue(rule, samples) -> float:
    """Mean revenue of ``rule`` over a sample set (exactly summed)."""
    revs = [rule.revenue(p) for p in samples]
    if not revs:
        raise ValueError("empty sample")
    return math.fsum(revs) / len(revs)


def rule_to_json(rule) -> dict:
    name = type(rule).__name__
    data = {"kind": name}
    for key, val in vars(rule).items():
        data[key] = _jsonable(val)
    return data


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(y) for y in x]
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if hasattr(x, "__dataclass_fields__"):
        return rule_to_json(x)
    return x


def rule_from_json(data: dict):
    from . import reductions

    kinds = {c.__name__: c for c in (AnonItem, IndItem, AnonBundle, IndBundle, SecondPrice,
                                     SPReservesAnon, SPReservesInd, ReducedItem)}
    kinds.update({c.__name__: c for c in (reductions.RestrictedIndItem,
                                          reductions.RestrictedIndBundle,
                                          reductions.RestrictedMix)})
    data = dict(data)
    cls = kinds[data.pop("kind")]

    def back(x):
        if isinstance(x, list):
            return tuple(back(y) for y in x)
        if x == "inf":
            return INF
        if isinstance(x, dict):
            return rule_from_json(x)
        return x

    return cls(**{key: back(val) for key, val in data.items()})

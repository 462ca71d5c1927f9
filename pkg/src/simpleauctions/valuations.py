"""Buyer valuations, value distributions and sample sets.

Items are indexed ``0..k-1``.  A bundle is a ``frozenset`` of item indices;
bundle tables are stored as a flat tuple indexed by bitmask (bit ``i`` set
means item ``i`` is in the bundle).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_TABLE_ITEMS = 20
MAX_VECTOR_ITEMS = 30

ADDITIVE = "additive"
UNIT_DEMAND = "unit_demand"
TABLE = "table"
SUBADDITIVE = "subadditive"

# one-ulp rounding differences between a sum and its split sums are not violations
SUBADDITIVE_RTOL = 1e-12

FLAG_NAMES = ("monotone", "subadditive", "additive", "unit_demand")


class ValuationError(ValueError):
    """Malformed valuation, distribution or sample set."""


def mask_of(bundle: Iterable[int]) -> int:
    m = 0
    for item in bundle:
        m |= 1 << item
    return m


def items_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def bundle_of(mask: int) -> frozenset:
    return frozenset(items_of(mask))


# --------------------------------------------------------------------------
# valuations


@dataclass(frozen=True)
class Additive:
    values: tuple[float, ...]
    tag = ADDITIVE

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        _check_vector(self.values)

    @property
    def k(self) -> int:
        return len(self.values)

    def single(self, item: int) -> float:
        return self.values[item]


@dataclass(frozen=True)
class UnitDemand:
    values: tuple[float, ...]
    tag = UNIT_DEMAND

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        _check_vector(self.values)

    @property
    def k(self) -> int:
        return len(self.values)

    def single(self, item: int) -> float:
        return self.values[item]


@dataclass(frozen=True)
class BundleTable:
    """Explicit value for every one of the ``2**k`` bundles.

    ``values[mask]`` is the value of the bundle encoded by ``mask``.  The
    flags record which class identities the table claims to satisfy;
    :func:`validate_valuation` checks them.
    """

    values: tuple[float, ...]
    k: int
    monotone: bool = False
    subadditive: bool = False
    additive: bool = False
    unit_demand: bool = False
    tag = TABLE

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        if not 0 <= self.k <= MAX_TABLE_ITEMS:
            raise ValuationError(f"table valuations support k <= {MAX_TABLE_ITEMS}, got {self.k}")
        if len(self.values) != 1 << self.k:
            raise ValuationError(
                f"table for k={self.k} needs {1 << self.k} entries, got {len(self.values)}"
            )
        if any(math.isnan(x) or x < 0 for x in self.values):
            raise ValuationError("bundle values must be nonnegative numbers")

    @classmethod
    def from_dict(cls, table: dict, k: int, **flags) -> "BundleTable":
        """Build from ``{bundle: value}``; every bundle except the empty one is required."""
        values = [0.0] * (1 << k)
        seen = {0}
        for bundle, value in table.items():
            m = mask_of(bundle)
            if m >> k:
                raise ValuationError(f"bundle {sorted(bundle)} has items outside range({k})")
            values[m] = value
            seen.add(m)
        missing = [sorted(items_of(m)) for m in range(1 << k) if m not in seen]
        if missing:
            raise ValuationError(f"missing bundle keys: {missing}")
        return cls(tuple(values), k, **flags)

    def single(self, item: int) -> float:
        return self.values[1 << item]

    @property
    def flags(self) -> dict:
        return {name: getattr(self, name) for name in FLAG_NAMES}


Valuation = Additive | UnitDemand | BundleTable


def _check_vector(values: Sequence[float]) -> None:
    if len(values) > MAX_VECTOR_ITEMS:
        raise ValuationError(f"vector valuations support k <= {MAX_VECTOR_ITEMS}")
    if any(math.isnan(x) or x < 0 or math.isinf(x) for x in values):
        raise ValuationError("item values must be finite and nonnegative")


def bundle_value(v: Valuation, bundle) -> float:
    """Value of a bundle (a collection of item indices, or a bitmask int)."""
    if isinstance(v, BundleTable):
        return v.values[bundle if isinstance(bundle, int) else mask_of(bundle)]
    items = items_of(bundle) if isinstance(bundle, int) else bundle
    if isinstance(v, Additive):
        return math.fsum(v.values[i] for i in items)
    return max((v.values[i] for i in items), default=0.0)


def as_table(v: Valuation) -> BundleTable:
    if isinstance(v, BundleTable):
        return v
    k = v.k
    vals = tuple(bundle_value(v, m) for m in range(1 << k))
    if isinstance(v, Additive):
        return BundleTable(vals, k, monotone=True, subadditive=True, additive=True)
    return BundleTable(vals, k, monotone=True, subadditive=True, unit_demand=True)


@dataclass(frozen=True)
class Violation:
    prop: str
    witness: tuple[frozenset, frozenset]

    def __str__(self):
        a, b = (sorted(s) for s in self.witness)
        return f"{self.prop} violated at ({a}, {b})"


def validate_valuation(v: Valuation) -> list[Violation]:
    """Check every class identity a valuation claims.

    Vector forms satisfy their identities by construction; tables are
    checked exhaustively.  Each report carries a witnessing bundle pair:
    ``(K, K')`` with ``K`` a subset of ``K'`` for monotonicity, a
    bipartition for subadditivity, and ``(K, {})`` for the additive and
    unit-demand identities.
    """
    if not isinstance(v, BundleTable):
        return []
    vals, k = v.values, v.k
    full = (1 << k) - 1
    out = []
    if vals[0] != 0:
        out.append(Violation("normalized", (frozenset(), frozenset())))
    if v.monotone:
        # checking single-item extensions suffices
        for m in range(full + 1):
            for i in range(k):
                if not m >> i & 1 and vals[m] > vals[m | 1 << i]:
                    out.append(Violation("monotone", (bundle_of(m), bundle_of(m | 1 << i))))
                    break
            if out and out[-1].prop == "monotone":
                break
    if v.subadditive:
        found = None
        for m in range(1, full + 1):
            # enumerate bipartitions of m as (sub, m ^ sub) once each
            sub = (m - 1) & m
            while sub:
                other = m ^ sub
                excess = vals[m] - (vals[sub] + vals[other])
                if sub < other and excess > SUBADDITIVE_RTOL * max(1.0, vals[m]):
                    found = Violation("subadditive", (bundle_of(sub), bundle_of(other)))
                    break
                sub = (sub - 1) & m
            if found:
                break
        if found:
            out.append(found)
    for flag, combine in (("additive", math.fsum), ("unit_demand", lambda xs: max(xs, default=0.0))):
        if getattr(v, flag):
            for m in range(1, full + 1):
                if vals[m] != combine([vals[1 << i] for i in items_of(m)]):
                    out.append(Violation(flag, (bundle_of(m), frozenset())))
                    break
    return out


# --------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValuationError(f"Uniform needs lo <= hi, got ({self.lo}, {self.hi})")

    @property
    def finite(self) -> bool:
        return self.lo == self.hi

    def support(self):
        if not self.finite:
            raise ValuationError("continuous Uniform has no finite support")
        return ((float(self.lo), 1.0),)

    def bounds(self):
        return self.lo, self.hi

    def mean(self) -> float:
        return (self.lo + self.hi) / 2

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size)


@dataclass(frozen=True)
class Discrete:
    """Finite distribution given as ``((value, probability), ...)``."""

    points: tuple

    def __post_init__(self):
        pts = tuple((float(x), float(p)) for x, p in self.points)
        if not pts:
            raise ValuationError("Discrete needs at least one support point")
        if any(p < 0 for _, p in pts):
            raise ValuationError("negative probability")
        total = math.fsum(p for _, p in pts)
        if abs(total - 1.0) > 1e-12:
            raise ValuationError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "points", tuple((x, p / total) for x, p in pts))

    @classmethod
    def uniform_over(cls, values: Iterable[float]) -> "Discrete":
        values = list(values)
        return cls(tuple((x, 1.0 / len(values)) for x in values))

    finite = True

    def support(self):
        return self.points

    def bounds(self):
        xs = [x for x, _ in self.points]
        return min(xs), max(xs)

    def mean(self) -> float:
        return math.fsum(x * p for x, p in self.points)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        xs = np.array([x for x, _ in self.points])
        ps = np.array([p for _, p in self.points])
        return xs[rng.choice(len(xs), size=size, p=ps)]


@dataclass(frozen=True)
class Constant:
    value: float
    finite = True

    def support(self):
        return ((float(self.value), 1.0),)

    def bounds(self):
        return self.value, self.value

    def mean(self) -> float:
        return float(self.value)

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, float(self.value))


Marginal = Uniform | Discrete | Constant


@dataclass(frozen=True)
class ProductDistribution:
    """Independent per-item marginals on ``[0, ceiling]``."""

    marginals: tuple
    ceiling: float

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        if not self.marginals:
            raise ValuationError("need at least one item marginal")
        for i, marg in enumerate(self.marginals):
            lo, hi = marg.bounds()
            if lo < 0 or hi > self.ceiling:
                raise ValuationError(
                    f"item {i}: support [{lo}, {hi}] exceeds value range [0, {self.ceiling}]"
                )

    @property
    def k(self) -> int:
        return len(self.marginals)

    @property
    def finite(self) -> bool:
        return all(m.finite for m in self.marginals)

    def support_size(self) -> int:
        return math.prod(len(m.support()) for m in self.marginals)


def iid(marginal: Marginal, k: int, ceiling: float) -> ProductDistribution:
    return ProductDistribution((marginal,) * k, ceiling)


COMBINERS = ("SUM", "MAX", "CAPPED_SUM", "SQRT_SUM")


def combine(combiner: str, xs: Sequence[float], budget: float | None = None) -> float:
    """Value of a bundle whose items carry attributes ``xs``."""
    if combiner == "SUM":
        return math.fsum(xs)
    if combiner == "MAX":
        return max(xs, default=0.0)
    if combiner == "CAPPED_SUM":
        return min(math.fsum(xs), budget)
    if combiner == "SQRT_SUM":
        return math.sqrt(math.fsum(xs))
    raise ValuationError(f"unknown combiner {combiner!r}; choose from {COMBINERS}")


@dataclass(frozen=True)
class SubadditiveGenerator:
    """Subadditive-over-independent-items valuations.

    Draws an attribute vector from ``attributes`` and sets
    ``v(K) = combine({x_i : i in K})``.  Every built-in combiner is monotone
    and subadditive for nonnegative attributes.
    """

    attributes: ProductDistribution
    combiner: str = "SQRT_SUM"
    budget: float | None = None

    def __post_init__(self):
        if self.combiner not in COMBINERS:
            raise ValuationError(f"unknown combiner {self.combiner!r}")
        if self.combiner == "CAPPED_SUM" and (self.budget is None or self.budget < 0):
            raise ValuationError("CAPPED_SUM needs a nonnegative budget")
        if self.attributes.k > MAX_TABLE_ITEMS:
            raise ValuationError(f"subadditive generator supports k <= {MAX_TABLE_ITEMS}")

    @property
    def k(self) -> int:
        return self.attributes.k

    @property
    def ceiling(self) -> float:
        """Largest possible value of the grand bundle."""
        his = [m.bounds()[1] for m in self.attributes.marginals]
        return combine(self.combiner, his, self.budget)

    def build(self, xs: Sequence[float]) -> BundleTable:
        k = len(xs)
        vals = tuple(combine(self.combiner, [xs[i] for i in items_of(m)], self.budget)
                     for m in range(1 << k))
        return BundleTable(vals, k, monotone=True, subadditive=True,
                           additive=self.combiner == "SUM",
                           unit_demand=self.combiner == "MAX")


@dataclass(frozen=True)
class BuyerDistribution:
    """How one buyer's valuation is drawn.

    ``kind`` is ``additive`` or ``unit_demand`` (values drawn from ``items``)
    or ``subadditive`` (tables built by ``generator``).
    """

    kind: str
    items: ProductDistribution | None = None
    generator: SubadditiveGenerator | None = None

    def __post_init__(self):
        if self.kind in (ADDITIVE, UNIT_DEMAND):
            if self.items is None:
                raise ValuationError(f"{self.kind} buyers need item marginals")
            if self.items.k > MAX_VECTOR_ITEMS:
                raise ValuationError(f"vector valuations support k <= {MAX_VECTOR_ITEMS}")
        elif self.kind == SUBADDITIVE:
            if self.generator is None:
                raise ValuationError("subadditive buyers need a generator")
        else:
            raise ValuationError(f"unknown buyer kind {self.kind!r}")

    @property
    def k(self) -> int:
        return self.items.k if self.items is not None else self.generator.k

    @property
    def marginals(self) -> tuple:
        return (self.items if self.items is not None else self.generator.attributes).marginals

    @property
    def ceiling(self) -> float:
        """Upper bound on any single buyer's value for the grand bundle."""
        if self.kind == ADDITIVE:
            return self.items.ceiling * self.k
        if self.kind == UNIT_DEMAND:
            return self.items.ceiling
        return self.generator.ceiling

    @property
    def finite(self) -> bool:
        return all(m.finite for m in self.marginals)

    def make(self, xs: Sequence[float]) -> Valuation:
        if self.kind == ADDITIVE:
            return Additive(tuple(xs))
        if self.kind == UNIT_DEMAND:
            return UnitDemand(tuple(xs))
        return self.generator.build(xs)


def additive_dist(marginals, ceiling) -> BuyerDistribution:
    return BuyerDistribution(ADDITIVE, ProductDistribution(tuple(marginals), ceiling))


def unit_demand_dist(marginals, ceiling) -> BuyerDistribution:
    return BuyerDistribution(UNIT_DEMAND, ProductDistribution(tuple(marginals), ceiling))


def _per_buyer(dist, n: int) -> tuple[BuyerDistribution, ...]:
    if isinstance(dist, BuyerDistribution):
        return (dist,) * n
    dists = tuple(dist)
    if len(dists) != n:
        raise ValuationError(f"got {len(dists)} buyer distributions for n={n}")
    if len({d.kind for d in dists}) != 1 or len({d.k for d in dists}) != 1:
        raise ValuationError("all buyers must share valuation kind and item count")
    return dists


# --------------------------------------------------------------------------
# profiles and sample sets


@dataclass(frozen=True)
class ValuationProfile:
    buyers: tuple

    def __post_init__(self):
        object.__setattr__(self, "buyers", tuple(self.buyers))
        if not self.buyers:
            raise ValuationError("a profile needs at least one buyer")
        if len({type(b) for b in self.buyers}) != 1:
            raise ValuationError("all buyers in a profile must share a valuation class")
        if len({b.k for b in self.buyers}) != 1:
            raise ValuationError("all buyers must have the same number of items")

    @property
    def n(self) -> int:
        return len(self.buyers)

    @property
    def k(self) -> int:
        return self.buyers[0].k

    @property
    def tag(self) -> str:
        return self.buyers[0].tag

    def __getitem__(self, i):
        return self.buyers[i]

    def __iter__(self):
        return iter(self.buyers)

    def __len__(self):
        return len(self.buyers)

    def matrix(self) -> np.ndarray:
        """``n x k`` array of single-item values."""
        return np.array([[b.single(i) for i in range(self.k)] for b in self.buyers])

    def to_json(self) -> dict:
        out = {"k": self.k, "n": self.n, "tag": self.tag,
               "values": [list(b.values) for b in self.buyers]}
        if self.tag == TABLE:
            out["flags"] = [b.flags for b in self.buyers]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ValuationProfile":
        tag, k = data["tag"], data["k"]
        if tag == ADDITIVE:
            buyers = [Additive(tuple(v)) for v in data["values"]]
        elif tag == UNIT_DEMAND:
            buyers = [UnitDemand(tuple(v)) for v in data["values"]]
        elif tag == TABLE:
            flags = data.get("flags") or [{}] * len(data["values"])
            buyers = [BundleTable(tuple(v), k, **f) for v, f in zip(data["values"], flags)]
        else:
            raise ValuationError(f"unknown tag {tag!r}")
        prof = cls(tuple(buyers))
        if prof.n != data["n"] or prof.k != k:
            raise ValuationError("profile dimensions disagree with header")
        return prof


def profile(*buyers) -> ValuationProfile:
    return ValuationProfile(tuple(buyers))


def additive_profile(*rows) -> ValuationProfile:
    return ValuationProfile(tuple(Additive(tuple(r)) for r in rows))


def unit_demand_profile(*rows) -> ValuationProfile:
    return ValuationProfile(tuple(UnitDemand(tuple(r)) for r in rows))


@dataclass(frozen=True)
class SampleSet:
    profiles: tuple
    seed: int | None = None
    source: object = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        if self.profiles:
            p0 = self.profiles[0]
            for p in self.profiles:
                if (p.n, p.k, p.tag) != (p0.n, p0.k, p0.tag):
                    raise ValuationError("sample profiles are not structurally compatible")

    @property
    def m(self) -> int:
        return len(self.profiles)

    @property
    def n(self) -> int:
        return self.profiles[0].n

    @property
    def k(self) -> int:
        return self.profiles[0].k

    @property
    def tag(self) -> str:
        return self.profiles[0].tag

    def __iter__(self) -> Iterator[ValuationProfile]:
        return iter(self.profiles)

    def __len__(self):
        return len(self.profiles)

    def __getitem__(self, j):
        return self.profiles[j]

    def singles(self) -> np.ndarray:
        """``m x n x k`` array of single-item values."""
        if "singles" not in self._cache:
            self._cache["singles"] = np.array([p.matrix() for p in self.profiles]).reshape(
                self.m, self.n, self.k)
        return self._cache["singles"]

    def grand_values(self) -> np.ndarray:
        """``m x n`` array of grand-bundle values."""
        if "grand" not in self._cache:
            full = (1 << self.k) - 1
            self._cache["grand"] = np.array(
                [[bundle_value(b, full) for b in p] for p in self.profiles]).reshape(self.m, self.n)
        return self._cache["grand"]

    def to_json(self) -> dict:
        return {"m": self.m, "seed": self.seed,
                "source": self.source if isinstance(self.source, (str, dict, type(None))) else repr(self.source),
                "profiles": [p.to_json() for p in self.profiles]}

    @classmethod
    def from_json(cls, data: dict) -> "SampleSet":
        return cls(tuple(ValuationProfile.from_json(p) for p in data["profiles"]),
                   data.get("seed"), data.get("source"))


def sample_set(samples: Iterable) -> SampleSet:
    """Wrap profiles (or single valuations, treated as one-buyer profiles)."""
    profs = []
    for s in samples:
        profs.append(s if isinstance(s, ValuationProfile) else ValuationProfile((s,)))
    return SampleSet(tuple(profs))


def _stream(seed: int, buyer: int, item: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(buyer, item)))


def draw_samples(dist, n: int, m: int, seed: int) -> SampleSet:
    """Draw ``m`` profiles of ``n`` buyers.

    Buyer ``i``'s attribute for item ``j`` in profile ``t`` is the ``t``-th
    draw of an independent stream keyed by ``(seed, i, j)``, so any value can
    be regenerated without replaying the others and a longer sample extends a
    shorter one with the same seed.
    """
    if m < 0 or n < 1:
        raise ValuationError("need n >= 1 and m >= 0")
    dists = _per_buyer(dist, n)
    k = dists[0].k
    cube = np.empty((m, n, k))
    for i, d in enumerate(dists):
        for j, marg in enumerate(d.marginals):
            cube[:, i, j] = marg.draw(_stream(seed, i, j), m)
    profiles = tuple(
        ValuationProfile(tuple(dists[i].make(cube[t, i].tolist()) for i in range(n)))
        for t in range(m))
    return SampleSet(profiles, seed, dist)


def sample_profile(dist, n: int, seed: int) -> ValuationProfile:
    return draw_samples(dist, n, 1, seed)[0]


def support_profiles(dist, n: int, limit: int = 10**6):
    """Enumerate ``(profile, probability)`` over a finite-support distribution."""
    dists = _per_buyer(dist, n)
    if not all(d.finite for d in dists):
        raise ValuationError("distribution has infinite support")
    axes = [m.support() for d in dists for m in d.marginals]
    size = math.prod(len(a) for a in axes)
    if size > limit:
        raise SupportTooLarge(f"support has {size} profiles, limit is {limit}")
    k = dists[0].k
    for combo in itertools.product(*axes):
        prob = math.prod(p for _, p in combo)
        xs = [x for x, _ in combo]
        yield (ValuationProfile(tuple(dists[i].make(xs[i * k:(i + 1) * k]) for i in range(n))),
               prob)


class SupportTooLarge(ValuationError):
    """Exact enumeration would exceed the configured size limit."""

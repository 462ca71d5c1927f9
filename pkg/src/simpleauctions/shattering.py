"""Shattering of witness-labeled sample sets by pricing classes.

A sample set ``v^1..v^m`` with witnesses ``r^1..r^m`` is shattered by a
class when, for every subset ``T`` of the samples, some member earns
``>= r^j`` on each ``j`` in ``T`` and ``< r^j`` on every other sample.

``shatter_check`` first scans a grid of candidate pricings.  For classes
whose revenue is piecewise affine in the prices, with pieces cut out by
comparisons ``price <= sample-derived value`` (every class here except item
pricings for unit-demand or bundle-table buyers), labelings the grid misses
are settled exactly: each cell of the order-equivalence partition is an
affine problem, checked by a linear feasibility program.  Only then can a
labeling be declared unachievable; otherwise the verdict is UNKNOWN.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .learners import with_midpoints
from .mechanisms import (AnonBundle, AnonItem, IndBundle, IndItem, ReducedItem, SPReservesAnon,
                         SPReservesInd, item_competition)
from .reductions import RestrictedIndBundle, RestrictedIndItem, compute_beta, modify_bids
from .valuations import ADDITIVE, SampleSet, draw_samples

INF = math.inf

SHATTERED = "SHATTERED"
NOT_SHATTERED = "NOT_SHATTERED"
UNKNOWN = "UNKNOWN"

ANON_BUNDLE = "ANON_BUNDLE"
IND_BUNDLE = "IND_BUNDLE"
ANON_ITEM = "ANON_ITEM"
IND_ITEM = "IND_ITEM"
REDUCED_ITEM = "REDUCED_ITEM"
SP_RESERVES_ANON = "SP_RESERVES_ANON"
SP_RESERVES_IND = "SP_RESERVES_IND"
RESTRICTED_IND_ITEM = "RESTRICTED_IND_ITEM"
RESTRICTED_IND_BUNDLE = "RESTRICTED_IND_BUNDLE"

CLASS_IDS = (ANON_BUNDLE, IND_BUNDLE, ANON_ITEM, IND_ITEM, REDUCED_ITEM, SP_RESERVES_ANON,
             SP_RESERVES_IND, RESTRICTED_IND_ITEM, RESTRICTED_IND_BUNDLE)

MAX_M = 20


class ShatterError(ValueError):
    pass


# --------------------------------------------------------------------------
# class descriptions


class PricingClass:
    """Parameterization of one class on a fixed sample set.

    ``breakpoints[c]`` lists the sample-derived values at which comparisons
    involving parameter ``c`` flip.  ``affine(x)`` returns ``(A, const)``
    with revenue ``A @ x + const`` on every sample, valid throughout the
    cell containing ``x``; it is None for classes without that structure.
    """

    affine_exact = True

    def __init__(self, samples: SampleSet):
        self.samples = samples
        self.n, self.k, self.m = samples.n, samples.k, samples.m
        self.setup()

    def setup(self):
        pass

    def patterns(self, params):
        rule = self.rule(params)
        return tuple(rule.run(p).purchased for p in self.samples)

    def revenues(self, params) -> np.ndarray:
        rule = self.rule(params)
        return np.array([rule.revenue(p) for p in self.samples])


def _rows(params, n, k):
    return tuple(tuple(params[i * k:(i + 1) * k]) for i in range(n))


class AnonBundleClass(PricingClass):
    def setup(self):
        self.dim = 1
        self.grand = self.samples.grand_values()
        self.breakpoints = [sorted(set(self.grand.ravel().tolist()))]

    def rule(self, x):
        return AnonBundle(x[0])

    def affine(self, x):
        sold = (self.grand >= x[0]).any(axis=1)
        return sold.astype(float)[:, None], np.zeros(self.m)


class IndBundleClass(PricingClass):
    def setup(self):
        self.dim = self.n
        self.grand = self.samples.grand_values()
        self.breakpoints = [sorted(set(self.grand[:, i].tolist())) for i in range(self.n)]

    def rule(self, x):
        return IndBundle(tuple(x))

    def affine(self, x):
        A = np.zeros((self.m, self.n))
        for j in range(self.m):
            for i in range(self.n):
                if self.grand[j, i] >= x[i]:
                    A[j, i] = 1.0
                    break
        return A, np.zeros(self.m)


class ItemClass(PricingClass):
    anonymous = True

    def setup(self):
        self.dim = self.k if self.anonymous else self.n * self.k
        self.affine_exact = self.samples.tag == ADDITIVE
        singles = self.samples.singles()
        if self.anonymous:
            self.breakpoints = [sorted(set(singles[:, :, j].ravel().tolist())) for j in range(self.k)]
        else:
            self.breakpoints = [sorted(set(singles[:, i, j].tolist()))
                                for i in range(self.n) for j in range(self.k)]
        self.singles = singles

    def rule(self, x):
        return AnonItem(tuple(x)) if self.anonymous else IndItem(_rows(x, self.n, self.k))

    def affine(self, x):
        if not self.affine_exact:
            return None
        A = np.zeros((self.m, self.dim))
        for j in range(self.m):
            for item in range(self.k):
                for i in range(self.n):
                    c = item if self.anonymous else i * self.k + item
                    if self.singles[j, i, item] >= x[c]:
                        A[j, c] = 1.0
                        break
        return A, np.zeros(self.m)


class IndItemClass(ItemClass):
    anonymous = False


class ReducedItemClass(PricingClass):
    def setup(self):
        if self.n != 1:
            raise ShatterError("revenue-reduced item pricings score a single buyer")
        self.dim = self.k
        self.singles = self.samples.singles()[:, 0, :]
        self.breakpoints = [sorted(set(self.singles[:, j].tolist())) for j in range(self.k)]

    def rule(self, x):
        return ReducedItem(tuple(x))

    def affine(self, x):
        clear = self.singles >= np.asarray(x)
        A = np.where((clear.sum(axis=1) == 1)[:, None], clear, False).astype(float)
        return A, np.zeros(self.m)


class SPReservesClass(PricingClass):
    anonymous = True

    def setup(self):
        if self.samples.tag != ADDITIVE or self.n < 2:
            raise ShatterError("second-price auctions need at least two additive buyers")
        self.dim = self.k if self.anonymous else self.n * self.k
        self.comp = [item_competition(p) for p in self.samples]
        pts = [set() for _ in range(self.dim)]
        for comp in self.comp:
            for item in range(self.k):
                c = item if self.anonymous else comp.winner[item] * self.k + item
                pts[c].update((comp.win_value[item], comp.second_value[item]))
        self.breakpoints = [sorted(s) for s in pts]

    def rule(self, x):
        return SPReservesAnon(tuple(x)) if self.anonymous else SPReservesInd(_rows(x, self.n, self.k))

    def affine(self, x):
        A, const = np.zeros((self.m, self.dim)), np.zeros(self.m)
        for j, comp in enumerate(self.comp):
            for item in range(self.k):
                c = item if self.anonymous else comp.winner[item] * self.k + item
                if comp.win_value[item] >= x[c]:
                    if x[c] <= comp.second_value[item]:
                        const[j] += comp.second_value[item]
                    else:
                        A[j, c] += 1.0
        return A, const


class SPReservesIndClass(SPReservesClass):
    anonymous = False


class RestrictedItemClass(PricingClass):
    def setup(self):
        if self.samples.tag != ADDITIVE or self.n < 2:
            raise ShatterError("restricted pricings need at least two additive buyers")
        self.dim = self.n * self.k
        self.beta = np.array([compute_beta(p) for p in self.samples])
        self.vbar = np.array([modify_bids(p) for p in self.samples])
        self.breakpoints = [sorted(set(self.beta[:, i, j].tolist()) | set(self.vbar[:, i, j].tolist()))
                            for i in range(self.n) for j in range(self.k)]

    def rule(self, x):
        return RestrictedIndItem(_rows(x, self.n, self.k))

    def affine(self, x):
        A, const = np.zeros((self.m, self.dim)), np.zeros(self.m)
        for j in range(self.m):
            for i in range(self.n):
                for item in range(self.k):
                    c = i * self.k + item
                    b, vb = self.beta[j, i, item], self.vbar[j, i, item]
                    if vb > 0 and vb >= max(b, x[c]):
                        if x[c] <= b:
                            const[j] += b
                        else:
                            A[j, c] += 1.0
        return A, const


class RestrictedBundleClass(PricingClass):
    def setup(self):
        if self.samples.tag != ADDITIVE or self.n < 2:
            raise ShatterError("restricted pricings need at least two additive buyers")
        self.dim = self.n
        beta = np.array([compute_beta(p) for p in self.samples])
        vbar = np.array([modify_bids(p) for p in self.samples])
        self.active = (vbar > 0).any(axis=2)
        self.floor = np.where(vbar > 0, beta, 0.0).sum(axis=2)
        self.total = vbar.sum(axis=2)
        self.breakpoints = [sorted(set(self.floor[:, i].tolist()) | set(self.total[:, i].tolist()))
                            for i in range(self.n)]

    def rule(self, x):
        return RestrictedIndBundle(tuple(x))

    def affine(self, x):
        A, const = np.zeros((self.m, self.n)), np.zeros(self.m)
        for j in range(self.m):
            for i in range(self.n):
                if self.active[j, i] and self.total[j, i] >= max(self.floor[j, i], x[i]):
                    if x[i] <= self.floor[j, i]:
                        const[j] += self.floor[j, i]
                    else:
                        A[j, i] += 1.0
        return A, const


CLASSES = {
    ANON_BUNDLE: AnonBundleClass, IND_BUNDLE: IndBundleClass, ANON_ITEM: ItemClass,
    IND_ITEM: IndItemClass, REDUCED_ITEM: ReducedItemClass, SP_RESERVES_ANON: SPReservesClass,
    SP_RESERVES_IND: SPReservesIndClass, RESTRICTED_IND_ITEM: RestrictedItemClass,
    RESTRICTED_IND_BUNDLE: RestrictedBundleClass,
}


def pricing_class(class_id: str, samples: SampleSet) -> PricingClass:
    try:
        return CLASSES[class_id](samples)
    except KeyError:
        raise ShatterError(f"unknown class {class_id!r}; choose from {CLASS_IDS}") from None


# --------------------------------------------------------------------------
# instances and verdicts


@dataclass(frozen=True)
class ShatterInstance:
    samples: SampleSet
    witnesses: tuple
    class_id: str

    def __post_init__(self):
        object.__setattr__(self, "witnesses", tuple(float(w) for w in self.witnesses))
        if len(self.witnesses) != self.samples.m:
            raise ShatterError("need one witness per sample")
        if self.class_id not in CLASS_IDS:
            raise ShatterError(f"unknown class {self.class_id!r}")

    @property
    def m(self) -> int:
        return self.samples.m

    def to_json(self) -> dict:
        return {"class_id": self.class_id, "witnesses": list(self.witnesses),
                "samples": self.samples.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "ShatterInstance":
        return cls(SampleSet.from_json(data["samples"]), tuple(data["witnesses"]), data["class_id"])


@dataclass
class ShatterVerdict:
    status: str
    evidence: dict = field(default_factory=dict)  # labeling (frozenset) -> rule
    failed_labeling: frozenset | None = None
    certificate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .mechanisms import rule_to_json

        return {
            "status": self.status,
            "evidence": [{"labeling": sorted(T), "rule": rule_to_json(rule)}
                         for T, rule in sorted(self.evidence.items(), key=lambda kv: _mask(kv[0]))],
            "failed_labeling": None if self.failed_labeling is None else sorted(self.failed_labeling),
            "certificate": self.certificate,
        }


def _mask(labeling) -> int:
    return sum(1 << j for j in labeling)


def _labeling(mask: int, m: int) -> frozenset:
    return frozenset(j for j in range(m) if mask >> j & 1)


def realized_labeling(rule, samples: SampleSet, witnesses: Sequence[float]) -> frozenset:
    """Samples on which the real mechanism earns at least the witness."""
    return frozenset(j for j, p in enumerate(samples) if rule.revenue(p) >= witnesses[j])


def verify_evidence(inst: ShatterInstance, verdict: ShatterVerdict) -> bool:
    """Re-run every witnessing pricing through the mechanism implementation."""
    return all(realized_labeling(rule, inst.samples, inst.witnesses) == T
               for T, rule in verdict.evidence.items())


def candidate_axes(pc: PricingClass, witnesses=(), midpoints: bool = True) -> list:
    """Per-coordinate candidates: breakpoints, midpoints, 0, one value above
    everything and ``inf``.  One-parameter classes also get the witnesses."""
    axes = []
    for bps in pc.breakpoints:
        vals = set(bps) | {0.0}
        if pc.dim == 1:
            vals |= {w for w in witnesses if w >= 0}
        vals = with_midpoints(vals) if midpoints else sorted(vals)
        axes.append(vals + [vals[-1] + 1.0, INF])
    return axes


# --------------------------------------------------------------------------
# exact cell search


def _cells(pc: PricingClass):
    """Enumerate cells of the order-equivalence partition as per-coordinate
    ``(lower, upper, lower_open)`` bounds plus a representative point."""
    per_coord = []
    for bps in pc.breakpoints:
        pts = sorted(set(bps) | {0.0})
        opts = [(0.0, 0.0, False, 0.0)]
        for lo, hi in zip(pts, pts[1:]):
            opts.append((lo, hi, True, hi))
        opts.append((pts[-1], pts[-1] + 1.0, True, pts[-1] + 1.0))
        per_coord.append(opts)
    return itertools.product(*per_coord)


def _cell_lp(A, const, cell, in_T, witnesses):
    """Find x in the cell realizing the labeling, maximizing slack on the
    strict inequalities; returns x or None."""
    m, d = A.shape
    # variables: x (d), t
    rows, rhs = [], []
    for j in range(m):
        row = np.zeros(d + 1)
        if in_T[j]:
            row[:d] = -A[j]
            rows.append(row)
            rhs.append(const[j] - witnesses[j])
        else:
            row[:d] = A[j]
            row[d] = 1.0
            rows.append(row)
            rhs.append(witnesses[j] - const[j])
    bounds = []
    for c, (lo, hi, lo_open, _) in enumerate(cell):
        if lo_open:
            row = np.zeros(d + 1)
            row[c] = -1.0
            row[d] = 1.0
            rows.append(row)
            rhs.append(-lo)
        bounds.append((lo, hi))
    bounds.append((None, 1.0))
    obj = np.zeros(d + 1)
    obj[d] = -1.0
    res = linprog(obj, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    return tuple(float(v) for v in res.x[:d])


def shatter_check(inst: ShatterInstance, budget: int | None = None, *, exact: bool = True,
                  midpoints: bool = True) -> ShatterVerdict:
    """Decide whether the instance is shattered by its class.

    ``budget`` caps grid points plus cell programs examined; running out
    yields UNKNOWN.  ``exact=False`` skips the cell search (grid only).
    """
    m = inst.m
    if m > MAX_M:
        raise ShatterError(f"shatter checks enumerate 2^m labelings; m <= {MAX_M}")
    w = np.array(inst.witnesses)
    if (w <= 0).any():
        # revenues are nonnegative, so no pricing earns < r^j when r^j <= 0
        bad = frozenset(j for j in range(m) if w[j] > 0)
        return ShatterVerdict(NOT_SHATTERED, failed_labeling=bad,
                              certificate={"method": "nonnegative revenue",
                                           "samples_with_nonpositive_witness":
                                               [j for j in range(m) if w[j] <= 0]})
    pc = pricing_class(inst.class_id, inst.samples)
    target = 1 << m
    found: dict = {}
    spent = 0
    axes = candidate_axes(pc, inst.witnesses, midpoints)
    for point in itertools.product(*axes):
        if budget is not None and spent >= budget:
            break
        spent += 1
        rev = pc.revenues(point)
        mask = int(sum(1 << j for j in range(m) if rev[j] >= w[j]))
        if mask not in found:
            found[mask] = pc.rule(point)
            if len(found) == target:
                break
    grid_points = spent
    if len(found) == target:
        return _shattered(inst, found, {"grid_points": grid_points})

    exhausted = budget is None or spent < budget
    cells = 0
    mismatch = False
    if exact and pc.affine_exact and exhausted:
        missing = [mk for mk in range(target) if mk not in found]
        for cell in _cells(pc):
            if not missing:
                break
            if budget is not None and spent >= budget:
                exhausted = False
                break
            rep = tuple(c[3] for c in cell)
            A, const = pc.affine(rep)
            cells += 1
            spent += 1
            still = []
            for mk in missing:
                in_T = [bool(mk >> j & 1) for j in range(m)]
                x = _cell_lp(A, const, cell, in_T, w)
                if x is None:
                    still.append(mk)
                    continue
                rule = pc.rule(x)
                if realized_labeling(rule, inst.samples, w) == _labeling(mk, m):
                    found[mk] = rule
                else:
                    mismatch = True
                    still.append(mk)
            missing = still
        if not missing:
            return _shattered(inst, found, {"grid_points": grid_points, "cells": cells})
        if exhausted and not mismatch:
            return ShatterVerdict(
                NOT_SHATTERED, evidence={_labeling(mk, m): r for mk, r in found.items()},
                failed_labeling=_labeling(missing[0], m),
                certificate={"method": "exhausted order-equivalence cells",
                             "grid_points": grid_points, "cells": cells,
                             "unachievable": [sorted(_labeling(mk, m)) for mk in missing]})
    missing = [mk for mk in range(target) if mk not in found]
    reason = ("budget exhausted" if not exhausted else
              "numerical mismatch in cell search" if mismatch else
              "candidate family not provably exhaustive for this class")
    return ShatterVerdict(UNKNOWN, evidence={_labeling(mk, m): r for mk, r in found.items()},
                          failed_labeling=_labeling(missing[0], m),
                          certificate={"reason": reason, "grid_points": grid_points, "cells": cells})


def _shattered(inst, found, cert) -> ShatterVerdict:
    m = inst.m
    verdict = ShatterVerdict(SHATTERED, {_labeling(mk, m): r for mk, r in found.items()},
                             certificate=cert)
    if not verify_evidence(inst, verdict):
        raise AssertionError("shattering evidence failed re-verification")
    return verdict


# --------------------------------------------------------------------------
# constructive search and labeling counts


@dataclass
class SearchResult:
    size: int
    instance: ShatterInstance | None
    verdict: ShatterVerdict | None
    candidates_used: int


def _witness_options(revs: np.ndarray) -> list:
    """Per sample, thresholds strictly between consecutive achieved revenues."""
    out = []
    for col in revs.T:
        levels = sorted(set(col.tolist()))
        out.append([(a + b) / 2 for a, b in zip(levels, levels[1:])])
    return out


def pd_lower_bound_search(class_id: str, dist, max_m: int, budget: int, seed: int, n: int = 1,
                          witness_tries: int = 64, attempts_per_size: int = 8) -> SearchResult:
    """Random search for a large shattered set.

    Sample sets are drawn from ``dist``; witnesses are placed between
    revenue levels the candidate grid actually achieves.  ``budget`` caps the
    total number of candidate pricings evaluated.
    """
    if max_m > MAX_M:
        raise ShatterError(f"max_m must be <= {MAX_M}")
    rng = np.random.default_rng(seed)
    spent = 0
    best = SearchResult(0, None, None, 0)
    for m in range(1, max_m + 1):
        success = False
        for _ in range(attempts_per_size):
            if spent >= budget:
                break
            samples = draw_samples(dist, n, m, int(rng.integers(2**63)))
            pc = pricing_class(class_id, samples)
            axes = candidate_axes(pc)
            points = list(itertools.product(*axes))
            if spent + len(points) > budget:
                points = points[:budget - spent]
            spent += len(points)
            if not points:
                break
            revs = np.array([pc.revenues(pt) for pt in points])
            options = _witness_options(revs)
            if any(not o for o in options):
                continue
            for _ in range(witness_tries):
                w = np.array([o[int(rng.integers(len(o)))] for o in options])
                masks = {int(((r >= w) * (1 << np.arange(m))).sum()) for r in revs}
                if len(masks) == 1 << m:
                    inst = ShatterInstance(samples, tuple(w.tolist()), class_id)
                    verdict = shatter_check(inst, exact=False)
                    if verdict.status == SHATTERED:
                        best = SearchResult(m, inst, verdict, spent)
                        success = True
                        break
            if success:
                break
        if not success:
            break
    best.candidates_used = spent
    return best


def labeling_count(class_id: str, samples: SampleSet, max_grid: int = 10**7) -> int:
    """Number of distinct purchase patterns (one outcome per sample) the
    candidate grid realizes."""
    pc = pricing_class(class_id, samples)
    axes = [ax[:-1] for ax in candidate_axes(pc)]  # drop inf; max+1 already sells nothing
    size = math.prod(len(a) for a in axes)
    if size > max_grid:
        raise ShatterError(f"grid has {size} points, limit is {max_grid}")
    return len({pc.patterns(pt) for pt in itertools.product(*axes)})


def labeling_bound(class_id: str, m: int, k: int) -> int | None:
    """``(m+1)^k`` patterns for anonymous item pricing of additive buyers."""
    return (m + 1) ** k if class_id == ANON_ITEM else None

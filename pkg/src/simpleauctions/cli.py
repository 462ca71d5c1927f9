"""Command-line front end: ``simpleauctions {sample,run,learn,oracle,shatter,bound}``.

Exit codes: 0 success, 2 configuration error, 3 size limit exceeded,
4 internal invariant violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import learners as L
from .config import Config, ConfigError, Experiment, Instance, _int, _num, _parse_list, load_experiment, load_instance
from .mechanisms import (AnonBundle, AnonItem, IndBundle, IndItem, MechanismError, ReducedItem, SecondPrice,
                         SPReservesAnon, SPReservesInd, empirical_revenue, rule_to_json)
from .oracles import FiniteTypeSpace, verify_approx_factor
from .reductions import RestrictedIndBundle, RestrictedIndItem
from .shattering import (ShatterError, ShatterInstance, labeling_bound, labeling_count,
                         pd_lower_bound_search, shatter_check)
from .valuations import (ADDITIVE, SUBADDITIVE, Additive, Discrete, ProductDistribution, SampleSet,
                         SupportTooLarge, ValuationError, ValuationProfile, BuyerDistribution,
                         draw_samples, sample_set)

EXIT_CONFIG, EXIT_SIZE, EXIT_INVARIANT = 2, 3, 4
GAP_TOL = 1e-8


class SizeLimit(RuntimeError):
    pass


class InvariantViolation(RuntimeError):
    pass


# --------------------------------------------------------------------------
# output


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return "inf" if math.isinf(x) else format(float(x), ".12g")
    return str(x)


def _round_floats(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        return "inf" if math.isinf(obj) else float(format(float(obj), ".12g"))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def to_json_text(obj) -> str:
    return json.dumps(_round_floats(obj), indent=2, sort_keys=True) + "\n"


def to_csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    return buf.getvalue()


@dataclass
class Output:
    json_obj: object
    header: list
    rows: list

    def render(self, fmt_name: str) -> str:
        if fmt_name == "csv":
            return to_csv_text(self.header, self.rows)
        return to_json_text(self.json_obj)


# --------------------------------------------------------------------------
# learn


LEARN_CLASSES = {
    "BUNDLE": L.erm_bundle_pricing,
    "ITEM_ADDITIVE": L.erm_item_pricing_additive,
    "ITEM_OR_BUNDLE": L.erm_item_or_bundle,
    "ITEM_GENERAL": None,
    "REDUCED_ITEM": None,
    "REDUCED_OR_BUNDLE": None,
    "MULTI_ADDITIVE": L.erm_multi_additive_pipeline,
}

LEARN_HEADER = ["m", "trial", "class_id", "empirical_rev", "true_rev_of_chosen",
                "best_true_rev_on_candidate_grid", "gap", "true_rev_mode", "stderr", "sub_seed"]


def check_class_hypotheses(class_id: str, inst: Instance):
    """Reject class/buyer combinations the learning guarantees do not cover."""
    if class_id not in LEARN_CLASSES:
        raise ConfigError(f"unknown learning class {class_id!r}; choose from {sorted(LEARN_CLASSES)}")
    if class_id in ("BUNDLE", "ITEM_ADDITIVE", "ITEM_OR_BUNDLE"):
        if inst.n != 1 or (class_id != "BUNDLE" and inst.buyer != ADDITIVE):
            raise ConfigError(
                f"{class_id} assumes a single additive buyer with independent item values "
                "(hypothesis of the item-or-bundle approximation); "
                f"got n={inst.n}, buyer={inst.buyer}")
    elif class_id in ("REDUCED_ITEM", "REDUCED_OR_BUNDLE"):
        if inst.n != 1:
            raise ConfigError(
                f"{class_id} assumes a single buyer that is subadditive over independent items; "
                f"got n={inst.n}")
    elif class_id == "MULTI_ADDITIVE":
        if inst.n < 2 or inst.buyer != ADDITIVE:
            raise ConfigError(
                "MULTI_ADDITIVE assumes at least two additive buyers with values independent "
                f"across buyers and items (hypothesis of the multi-buyer reduction); "
                f"got n={inst.n}, buyer={inst.buyer}")
    elif class_id == "ITEM_GENERAL" and inst.buyer == SUBADDITIVE and inst.n > 1:
        raise ConfigError("ITEM_GENERAL with several buyers needs additive or unit-demand buyers")


def sub_seed(master: int, m: int, trial: int) -> int:
    ss = np.random.SeedSequence([master, m, trial])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def run_erm(class_id: str, samples: SampleSet, mode: str, seed: int) -> L.ErmResult:
    if class_id == "ITEM_GENERAL":
        return L.erm_item_pricing_general(samples, mode, seed=seed)
    if class_id == "REDUCED_ITEM":
        return L.erm_reduced_item_pricing(samples, mode, seed=seed)
    if class_id == "REDUCED_OR_BUNDLE":
        return L.erm_reduced_or_bundle(samples, mode, seed=seed)
    return LEARN_CLASSES[class_id](samples)


def deployed(result: L.ErmResult):
    """The mechanism actually run: reduced pricings deploy as item pricings."""
    return result.details.get("deploy", result.chosen)


def learn_row(inst: Instance, exp: Experiment, ev: L.RevenueEvaluator, m: int, trial: int,
              seed: int | None = None) -> list:
    s = sub_seed(exp.seed, m, trial) if seed is None else seed
    samples = draw_samples(inst.dist, inst.n, m, s)
    result = run_erm(exp.class_id, samples, exp.mode, s)
    if abs(empirical_revenue(result.chosen, samples) - result.empirical_mean_revenue) > 1e-9:
        raise InvariantViolation("ERM result does not reproduce its empirical revenue")
    mech = deployed(result)
    true_rev = ev.revenue(mech)
    best = L.grid_best_true_revenue(result, samples, ev)
    gap = best - true_rev
    if gap < -GAP_TOL:
        raise InvariantViolation(f"negative gap {gap} at m={m}, trial={trial}")
    return [m, trial, exp.class_id, result.empirical_mean_revenue, true_rev, best, gap,
            "EXACT" if ev.exact else "MC", ev.stderr(mech), s]


def make_evaluator(inst: Instance, exp: Experiment) -> L.RevenueEvaluator:
    eval_seed = sub_seed(exp.seed, 0, 0)  # m = 0 never appears in a schedule
    return L.RevenueEvaluator.for_distribution(inst.dist, inst.n, exp.test_set_size, eval_seed)


def cmd_learn(cfg: Config, seed: int | None) -> Output:
    inst = load_instance(cfg)
    exp = load_experiment(cfg, seed)
    check_class_hypotheses(exp.class_id, inst)
    ev = make_evaluator(inst, exp)
    rows = [learn_row(inst, exp, ev, m, t) for m in exp.schedule for t in range(exp.trials)]
    rows.sort(key=lambda r: (r[0], r[1]))
    return Output([dict(zip(LEARN_HEADER, r)) for r in rows], LEARN_HEADER, rows)


# --------------------------------------------------------------------------
# sample / run


def _sample_rows(samples: SampleSet):
    rows = []
    for j, prof in enumerate(samples):
        for i, b in enumerate(prof):
            rows.append([j, i, *b.values])
    return rows


def cmd_sample(cfg: Config, seed: int | None) -> Output:
    inst = load_instance(cfg)
    m = cfg.get("experiment", "m", lambda t: _parse_list(t, _int), required=True)[0]
    if seed is None:
        seed = cfg.get("experiment", "seed", _int, 0)
    if m <= 0:
        raise ConfigError("experiment.m must be positive")
    samples = draw_samples(inst.dist, inst.n, m, seed)
    width = len(samples[0][0].values)
    header = ["sample", "buyer", *[f"v{c}" for c in range(width)]]
    data = samples.to_json()
    data["source"] = None
    return Output(data, header, _sample_rows(samples))


def _rows_of(text, n, k):
    vals = _parse_list(text)
    if len(vals) == k:
        return (tuple(vals),) * n
    if len(vals) != n * k:
        raise ConfigError(f"expected {k} or {n * k} prices, got {len(vals)}")
    return tuple(tuple(vals[i * k:(i + 1) * k]) for i in range(n))


def build_mechanism(cfg: Config, n: int, k: int):
    name = cfg.get("run", "mechanism", str, required=True).strip().upper()
    prices = cfg.get("run", "prices", str, "")
    rows = _rows_of(prices, n, k) if prices else None
    vals = _parse_list(prices) if prices else []
    try:
        if name == "ANON_ITEM":
            return AnonItem(rows[0])
        if name == "IND_ITEM":
            return IndItem(rows)
        if name == "ANON_BUNDLE":
            return AnonBundle(vals[0])
        if name == "IND_BUNDLE":
            return IndBundle(tuple(vals) if len(vals) == n else (vals[0],) * n)
        if name == "SECOND_PRICE":
            return SecondPrice()
        if name == "SP_RESERVES_ANON":
            return SPReservesAnon(rows[0])
        if name == "SP_RESERVES_IND":
            return SPReservesInd(rows)
        if name == "REDUCED_ITEM":
            return ReducedItem(rows[0])
        if name == "RESTRICTED_IND_ITEM":
            return RestrictedIndItem(rows)
        if name == "RESTRICTED_IND_BUNDLE":
            return RestrictedIndBundle(tuple(vals) if len(vals) == n else (vals[0],) * n)
    except (TypeError, IndexError):
        raise ConfigError(f"mechanism {name} needs run.prices") from None
    raise ConfigError(f"unknown mechanism {name!r}")


def cmd_run(cfg: Config, seed: int | None) -> Output:
    inst = load_instance(cfg)
    m = cfg.get("run", "m", _int, 1)
    if seed is None:
        seed = cfg.get("experiment", "seed", _int, 0)
    if m <= 0:
        raise ConfigError("run.m must be positive")
    mech = build_mechanism(cfg, inst.n, inst.k)
    samples = draw_samples(inst.dist, inst.n, m, seed)
    outs, rows = [], []
    for j, prof in enumerate(samples):
        out = mech.run(prof)
        alloc = out.allocation
        if len(set().union(*out.purchased)) != sum(len(b) for b in out.purchased):
            raise InvariantViolation("an item was allocated twice")
        outs.append(out.to_json())
        rows.append([j, out.revenue, ";".join(f"{it}:{b}" for it, b in enumerate(alloc) if b is not None)])
    mean = math.fsum(r[1] for r in rows) / m
    return Output({"mechanism": rule_to_json(mech), "seed": seed, "outcomes": outs,
                   "mean_revenue": mean},
                  ["sample", "revenue", "allocation"], rows)


# --------------------------------------------------------------------------
# oracle


def random_type_space(rng: np.random.Generator, k: int, points: int, lo: float, hi: float) -> FiniteTypeSpace:
    margs = []
    for _ in range(k):
        vals = np.sort(rng.choice(np.arange(int(lo), int(hi) + 1), size=points, replace=False))
        probs = rng.dirichlet(np.ones(points))
        margs.append(Discrete(tuple(zip(vals.tolist(), probs.tolist()))))
    dist = BuyerDistribution(ADDITIVE, ProductDistribution(tuple(margs), hi))
    return FiniteTypeSpace.from_distribution(dist)


def _oracle_row(idx, rep):
    return [idx, rep["rev"], rep["brev"], rep["prev"], rep["reduced_prev"], rep["ratio"],
            rep["factor"], rep["factor_ok"]]


ORACLE_HEADER = ["instance", "rev", "brev", "prev", "reduced_prev", "ratio", "factor", "factor_ok"]


def cmd_oracle(cfg: Config, seed: int | None) -> Output:
    factor = cfg.get("oracle", "factor", _num, 6.0)
    batch = cfg.get("oracle", "batch", _int, 0)
    if seed is None:
        seed = cfg.get("experiment", "seed", _int, 0)
    try:
        if batch > 0:
            k = cfg.get("oracle", "k", _int, 2)
            points = cfg.get("oracle", "support_points", _int, 3)
            lo, hi = cfg.get("oracle", "lo", _num, 1.0), cfg.get("oracle", "hi", _num, 10.0)
            if hi - lo + 1 < points:
                raise ConfigError("oracle value range has fewer integers than support_points")
            rng = np.random.default_rng(seed)
            spaces = [random_type_space(rng, k, points, lo, hi) for _ in range(batch)]
        else:
            inst = load_instance(cfg)
            if inst.n != 1:
                raise ConfigError("the revenue oracle handles a single buyer")
            spaces = [FiniteTypeSpace.from_distribution(inst.dist)]
    except ValuationError as exc:
        if "at most" in str(exc):
            raise SizeLimit(str(exc)) from None
        raise
    reports = [verify_approx_factor(ts, factor) for ts in spaces]
    rows = [_oracle_row(i, r) for i, r in enumerate(reports)]
    summary = {
        "instances": len(reports),
        "all_factor_ok": all(r["factor_ok"] for r in reports),
        "max_ratio": max(r["ratio"] for r in reports),
        "strict_gap_instances": sum(r["rev"] > max(r["brev"], r["prev"]) + 1e-9 for r in reports),
    }
    return Output({"reports": reports, "summary": summary}, ORACLE_HEADER, rows)


# --------------------------------------------------------------------------
# shatter


def parse_samples(text: str, k: int | None = None) -> SampleSet:
    """``"1,0; 0,1"`` (one buyer) or ``"1,2|3,4; ..."`` (buyers split by ``|``)."""
    profiles = []
    for chunk in str(text).split(";"):
        if not chunk.strip():
            continue
        buyers = [Additive(tuple(_parse_list(b))) for b in chunk.split("|")]
        profiles.append(ValuationProfile(tuple(buyers)))
    if not profiles:
        raise ConfigError("shatter.samples is empty")
    try:
        return sample_set(profiles)
    except ValuationError as exc:
        raise ConfigError(f"shatter.samples: {exc}") from None


def _witness_table(inst: ShatterInstance, verdict) -> list:
    rows = []
    for T, rule in sorted(verdict.evidence.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))):
        revs = [rule.revenue(p) for p in inst.samples]
        rows.append(["{" + ",".join(str(j) for j in sorted(T)) + "}",
                     " ".join(fmt(x) for x in rule.params()), *revs])
    return rows


def cmd_shatter(cfg: Config, seed: int | None) -> Output:
    mode = cfg.get("shatter", "mode", str, "check").strip().lower()
    class_id = cfg.get("shatter", "class", str, required=True).strip().upper()
    if seed is None:
        seed = cfg.get("experiment", "seed", _int, 0)
    if mode == "check":
        samples = parse_samples(cfg.get("shatter", "samples", str, required=True))
        witnesses = cfg.get("shatter", "witnesses", _parse_list, required=True)
        budget = cfg.get("shatter", "budget", _int)
        inst = ShatterInstance(samples, tuple(witnesses), class_id)
        verdict = shatter_check(inst, budget)
        header = ["labeling", "params", *[f"rev{j}" for j in range(inst.m)]]
        return Output({"instance": inst.to_json(), "verdict": verdict.to_json()}, header,
                      _witness_table(inst, verdict))
    if mode == "search":
        inst_cfg = load_instance(cfg)
        res = pd_lower_bound_search(class_id, inst_cfg.dist, cfg.get("shatter", "max_m", _int, 4),
                                    cfg.get("shatter", "budget", _int, 10_000), seed, inst_cfg.n)
        data = {"size": res.size, "candidates_used": res.candidates_used,
                "instance": res.instance.to_json() if res.instance else None,
                "verdict": res.verdict.to_json() if res.verdict else None}
        if res.instance is None:
            return Output(data, ["labeling", "params"], [])
        header = ["labeling", "params", *[f"rev{j}" for j in range(res.size)]]
        return Output(data, header, _witness_table(res.instance, res.verdict))
    if mode == "count":
        if cfg.get("shatter", "samples", str):
            samples = parse_samples(cfg.get("shatter", "samples", str))
        else:
            inst_cfg = load_instance(cfg)
            samples = draw_samples(inst_cfg.dist, inst_cfg.n, cfg.get("shatter", "m", _int, 5), seed)
        count = labeling_count(class_id, samples)
        bound = labeling_bound(class_id, samples.m, samples.k) if samples.n == 1 else None
        if bound is not None and count > bound:
            raise InvariantViolation(f"labeling count {count} exceeds (m+1)^k = {bound}")
        data = {"class_id": class_id, "m": samples.m, "k": samples.k, "count": count, "bound": bound,
                "within_bound": None if bound is None else count <= bound}
        return Output(data, list(data), [list(data.values())])
    raise ConfigError(f"unknown shatter mode {mode!r}")


# --------------------------------------------------------------------------
# bound


def cmd_bound(cfg: Config, args) -> Output:
    vals = {}
    for key in ("epsilon", "delta", "H", "pd"):
        v = getattr(args, key, None)
        if v is None:
            v = cfg.get("bound", key.lower(), _num)
        if v is None:
            raise ConfigError(f"missing {key} (flag --{key} or bound.{key.lower()})")
        vals[key] = v
    try:
        m = L.sample_bound(**vals)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    data = {**vals, "m": m, "warning": L.BOUND_WARNING}
    return Output(data, list(data), [list(data.values())])


# --------------------------------------------------------------------------
# entry point

COMMANDS = {"sample": cmd_sample, "run": cmd_run, "learn": cmd_learn, "oracle": cmd_oracle,
            "shatter": cmd_shatter}

DEFAULT_FORMAT = {"learn": "csv", "run": "json", "sample": "json", "oracle": "json",
                  "shatter": "json", "bound": "json"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simpleauctions",
                                     description="Pricing mechanisms, revenue learning and oracles.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sample", "run", "learn", "oracle", "shatter", "bound"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=name != "bound")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        if name == "bound":
            for flag in ("epsilon", "delta", "H", "pd"):
                p.add_argument(f"--{flag}", type=float)
    return parser


def execute(argv=None) -> tuple[str, str]:
    """Run a subcommand and return ``(rendered output, format)``."""
    args = build_parser().parse_args(argv)
    cfg = Config.load(args.config) if args.config else Config()
    if args.seed is not None and args.seed < 0:
        raise ConfigError("--seed must be nonnegative")
    if args.command == "bound":
        out = cmd_bound(cfg, args)
    else:
        out = COMMANDS[args.command](cfg, args.seed)
    fmt_name = args.format or DEFAULT_FORMAT[args.command]
    return out.render(fmt_name), args.out


def main(argv=None) -> int:
    try:
        text, path = execute(argv)
    except (ConfigError, ValuationError, MechanismError, ShatterError) as exc:
        if isinstance(exc, (SupportTooLarge, L.GridTooLarge)) or "limit" in str(exc):
            print(f"size limit: {exc}", file=sys.stderr)
            return EXIT_SIZE
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SizeLimit, L.GridTooLarge) as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (InvariantViolation, AssertionError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Experiment configuration: INI-style ``key = value`` sections, or the same
structure as a JSON object of objects.

Sections::

    [instance]      n, k, H, buyer (additive | unit_demand | subadditive),
                    combiner, budget (subadditive only)
    [distribution]  kind (discrete | uniform | constant) plus
                    values / probs (discrete), lo / hi (uniform), value (constant);
                    applies to every item unless an [item.J] section overrides it
    [experiment]    seed, m (schedule, comma separated), trials, test_set_size,
                    class, mode
    [run]           mechanism, prices, m
    [oracle]        batch, factor, support_points, lo, hi
    [shatter]       mode (check | search | count), class, samples, witnesses,
                    budget, max_m, m
    [bound]         epsilon, delta, H, pd

List values are comma separated; ``samples`` separates profiles with ``;``
and, for several buyers, buyers with ``|``.
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .valuations import (ADDITIVE, SUBADDITIVE, UNIT_DEMAND, BuyerDistribution, Constant, Discrete,
                         ProductDistribution, SubadditiveGenerator, Uniform, ValuationError)


class ConfigError(ValueError):
    pass


def _parse_list(text, conv=float) -> list:
    if isinstance(text, (list, tuple)):
        return [conv(x) for x in text]
    if isinstance(text, (int, float)):
        return [conv(text)]
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    try:
        return [conv(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad list {text!r}: {exc}") from None


def _num(text) -> float:
    return float(text)


@dataclass
class Config:
    sections: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "Config":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.parse(text, json_format=path.suffix == ".json")

    @classmethod
    def parse(cls, text: str, json_format: bool | None = None) -> "Config":
        if json_format is None:
            json_format = text.lstrip().startswith("{")
        if json_format:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON config: {exc}") from None
            if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
                raise ConfigError("JSON config must map section names to objects")
            return cls({s: {k.lower(): v for k, v in d.items()} for s, d in data.items()})
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"invalid config: {exc}") from None
        return cls({s: dict(parser[s]) for s in parser.sections()})

    def section(self, name: str, required: bool = False) -> dict:
        if name not in self.sections:
            if required:
                raise ConfigError(f"missing [{name}] section")
            return {}
        return self.sections[name]

    def get(self, section: str, key: str, conv=str, default=None, required: bool = False):
        sec = self.section(section, required)
        if key not in sec or sec[key] in ("", None):
            if required:
                raise ConfigError(f"missing {section}.{key}")
            return default
        try:
            return conv(sec[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {section}.{key}: {sec[key]!r} ({exc})") from None


def _int(x) -> int:
    f = float(x)
    if f != int(f):
        raise ValueError("expected an integer")
    return int(f)


@dataclass(frozen=True)
class Instance:
    n: int
    k: int
    H: float
    buyer: str
    dist: BuyerDistribution


def _marginal(spec: dict, where: str, item: int):
    kind = str(spec.get("kind", "")).strip().lower()

    def pick(values):
        return values[item] if len(values) > 1 else values[0]

    try:
        if kind == "discrete":
            values = _parse_list(spec["values"])
            probs = _parse_list(spec["probs"]) if spec.get("probs") not in (None, "") else None
            if probs is None:
                return Discrete.uniform_over(values)
            if len(probs) != len(values):
                raise ConfigError(f"{where}: values and probs differ in length")
            return Discrete(tuple(zip(values, probs)))
        if kind == "uniform":
            return Uniform(pick(_parse_list(spec["lo"])), pick(_parse_list(spec["hi"])))
        if kind == "constant":
            return Constant(pick(_parse_list(spec["value"])))
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc}") from None
    except ValuationError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unknown distribution kind {kind!r}")


def load_instance(cfg: Config) -> Instance:
    n = cfg.get("instance", "n", _int, 1)
    k = cfg.get("instance", "k", _int, required=True)
    H = cfg.get("instance", "h", _num, required=True)
    buyer = cfg.get("instance", "buyer", str, ADDITIVE).strip().lower()
    if n < 1 or k < 1:
        raise ConfigError("instance.n and instance.k must be positive")
    if not H > 0 or math.isinf(H):
        raise ConfigError("instance.H must be a positive finite ceiling")
    margs = []
    for j in range(k):
        spec = cfg.section(f"item.{j}") or cfg.section("distribution", required=True)
        margs.append(_marginal(spec, f"item {j}", j))
    try:
        items = ProductDistribution(tuple(margs), H)
        if buyer in (ADDITIVE, UNIT_DEMAND):
            dist = BuyerDistribution(buyer, items)
        elif buyer == SUBADDITIVE:
            gen = SubadditiveGenerator(items, cfg.get("instance", "combiner", str, "SQRT_SUM").upper(),
                                       cfg.get("instance", "budget", _num))
            dist = BuyerDistribution(SUBADDITIVE, generator=gen)
        else:
            raise ConfigError(f"unknown buyer class {buyer!r}")
    except ValuationError as exc:
        raise ConfigError(str(exc)) from None
    return Instance(n, k, H, buyer, dist)


@dataclass(frozen=True)
class Experiment:
    seed: int
    schedule: tuple
    trials: int
    test_set_size: int
    class_id: str
    mode: str


def load_experiment(cfg: Config, seed: int | None = None) -> Experiment:
    if seed is None:
        seed = cfg.get("experiment", "seed", _int, 0)
    schedule = tuple(cfg.get("experiment", "m", lambda t: _parse_list(t, _int), required=True))
    trials = cfg.get("experiment", "trials", _int, 1)
    tss = cfg.get("experiment", "test_set_size", _int, 100_000)
    if not schedule or any(m <= 0 for m in schedule):
        raise ConfigError("experiment.m must list positive sample sizes")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigError("experiment.m must be strictly increasing")
    if trials <= 0 or tss <= 0:
        raise ConfigError("experiment.trials and experiment.test_set_size must be positive")
    if seed < 0:
        raise ConfigError("seed must be nonnegative")
    return Experiment(seed, schedule, trials, tss,
                      cfg.get("experiment", "class", str, "ITEM_OR_BUNDLE").strip().upper(),
                      cfg.get("experiment", "mode", str, "EXHAUSTIVE_PRODUCT").strip().upper())

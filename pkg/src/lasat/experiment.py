"""Datasets of subtree maps over random 3-SAT and empirical order evaluation.

Bitset encoding in dataset files: a hex string with one digit per group of
four subtrees, digit i holding subtrees 4i..4i+3 with subtree 4i in the
digit's lowest bit (little-endian nibble order).
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

from .cnf import generate_uniform_ksat
from .heuristics import HeuristicConfig
from .orders import StrategyKind, code_bits, is_permutation, visit_order
from .rng import XorShift64Star
from .search import DEFAULT_BUDGET, BudgetExhausted, map_subtrees
from .treemodel import DepthProfile, profile_order

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
DESK_DEFAULTS = dict(count=200, n=100, ratio=4.26, d=8)


def encode_bits(bits: int, d: int) -> str:
    nibbles = max(1, (1 << d) // 4)
    return "".join("%x" % (bits >> (4 * i) & 0xF) for i in range(nibbles))


def decode_bits(text: str, d: int) -> int:
    bits = 0
    for i, ch in enumerate(text):
        bits |= int(ch, 16) << (4 * i)
    if bits >> (1 << d):
        raise ValueError("bitset has bits beyond 2**d subtrees")
    return bits


@dataclass
class SubtreeMap:
    instance_id: int
    seed: int
    n: int
    m: int
    d: int
    bits: int
    dead_prefixes: list[str] = field(default_factory=list)

    @property
    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "seed": self.seed,
            "n": self.n,
            "m": self.m,
            "d": self.d,
            "bits": encode_bits(self.bits, self.d),
            "dead_prefixes": list(self.dead_prefixes),
        }

    @classmethod
    def from_json(cls, obj: dict) -> SubtreeMap:
        return cls(obj["instance_id"], obj["seed"], obj["n"], obj["m"], obj["d"],
                   decode_bits(obj["bits"], obj["d"]), list(obj.get("dead_prefixes", [])))


@dataclass
class Dataset:
    records: list[SubtreeMap]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ds = {r.d for r in self.records}
        if len(ds) > 1:
            raise ValueError(f"records have mixed depths {sorted(ds)}")
        if self.records and "d" not in self.meta:
            self.meta["d"] = self.records[0].d

    @property
    def d(self) -> int:
        return self.meta["d"]

    def __len__(self):
        return len(self.records)

    def subset(self, indices: Iterable[int]) -> Dataset:
        return Dataset([self.records[i] for i in indices], dict(self.meta))

    def to_json(self) -> dict:
        return {"version": FORMAT_VERSION, "meta": self.meta,
                "records": [r.to_json() for r in self.records]}

    @classmethod
    def from_json(cls, obj: dict) -> Dataset:
        if obj.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported dataset version {obj.get('version')!r}")
        return cls([SubtreeMap.from_json(r) for r in obj["records"]], dict(obj["meta"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> Dataset:
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _map_one(args):
    n, m, d, seed, config, budget = args
    formula = generate_uniform_ksat(n, m, 3, seed)
    try:
        scan = map_subtrees(formula, config, d, budget)
    except BudgetExhausted:
        return seed, None, None
    return seed, scan.bits, scan.dead_prefixes


def build_dataset(count: int, n: int = 100, ratio: float = 4.26, d: int = 8, seed0: int = 0,
                  config: HeuristicConfig | None = None, jobs: int = 1,
                  budget: int = DEFAULT_BUDGET, max_attempts: int | None = None) -> Dataset:
    """Map instances with seeds seed0, seed0+1, ... keeping the satisfiable
    ones until ``count`` records exist (or ``max_attempts`` seeds are used).

    Records are accepted in seed order, so the result does not depend on
    ``jobs``.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    config = config or HeuristicConfig()
    m = round(ratio * n)
    if max_attempts is None:
        max_attempts = 100 * max(count, 1)
    meta = {"n": n, "m": m, "ratio": ratio, "d": d, "seed0": seed0,
            "heuristic": asdict(config), "budget": budget, "generator": "uniform-3sat/xorshift64*"}
    records: list[SubtreeMap] = []
    seeds = iter(range(seed0, seed0 + max_attempts))
    skipped = 0

    def take(results):
        nonlocal skipped
        for seed, bits, dead in results:
            if len(records) >= count:
                return
            if bits is None:
                skipped += 1
                log.warning("seed %d: budget exhausted, skipped", seed)
            elif bits:
                records.append(SubtreeMap(len(records), seed, n, m, d, bits, dead))
            else:
                log.debug("seed %d: unsatisfiable, skipped", seed)

    batch = max(jobs, 1) * 4
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        while len(records) < count:
            chunk = [(n, m, d, s, config, budget) for _, s in zip(range(batch), seeds)]
            if not chunk:
                log.warning("stopped after %d seeds with %d/%d records", max_attempts, len(records), count)
                break
            results = pool.map(_map_one, chunk) if pool else map(_map_one, chunk)
            take(results)
    finally:
        if pool:
            pool.shutdown()
    meta["skipped_budget"] = skipped
    return Dataset(records, meta)


def rebuild_record(record: SubtreeMap, config: HeuristicConfig, budget: int = DEFAULT_BUDGET) -> SubtreeMap:
    _, bits, dead = _map_one((record.n, record.m, record.d, record.seed, config, budget))
    return SubtreeMap(record.instance_id, record.seed, record.n, record.m, record.d, bits, dead)


def config_from_meta(meta: dict) -> HeuristicConfig:
    return HeuristicConfig(**meta["heuristic"]) if "heuristic" in meta else HeuristicConfig()


@dataclass
class EvalCurve:
    unsolved_fraction: list[float]  # entry k-1 = fraction with rank > k, k = 1..2**d
    e_star: float
    ranks: list[int]

    def area(self) -> float:
        """Area under the unsolved-fraction step curve (including k = 0)
        divided by 2**d."""
        size = len(self.unsolved_fraction)
        return (1.0 + math.fsum(self.unsolved_fraction[:-1])) / size if size else float("nan")


def _skip_dead_rank(order: Sequence[int], record: SubtreeMap) -> int:
    d = record.d
    dead = set(record.dead_prefixes)
    known: set[str] = set()
    entered = 0
    for leaf in order:
        code = code_bits(leaf, d)
        prefixes = [code[:i] for i in range(d + 1)]
        if any(p in known for p in prefixes):
            continue
        entered += 1
        if record.bits >> leaf & 1:
            return entered
        known.update(p for p in prefixes if p in dead)
    raise ValueError(f"instance {record.instance_id} has no satisfiable subtree")


def first_rank(order: Sequence[int], record: SubtreeMap, skip_dead: bool = False) -> int:
    if skip_dead:
        return _skip_dead_rank(order, record)
    bits = record.bits
    for pos, leaf in enumerate(order, start=1):
        if bits >> leaf & 1:
            return pos
    raise ValueError(f"instance {record.instance_id} has no satisfiable subtree")


def evaluate(order: Sequence[int], dataset: Dataset, skip_dead: bool = False) -> EvalCurve:
    """Rank of each instance's first satisfiable subtree under ``order``.

    e_star is the mean rank divided by 2**d; an empty dataset gives nan.
    """
    d = dataset.d
    size = 1 << d
    if not is_permutation(order, d):
        raise ValueError(f"order is not a permutation of 2**{d} subtrees")
    ranks = [first_rank(order, r, skip_dead) for r in dataset.records]
    if not ranks:
        return EvalCurve([0.0] * size, float("nan"), [])
    hist = [0] * (size + 1)
    for r in ranks:
        hist[r] += 1
    curve = []
    remaining = len(ranks)
    for k in range(1, size + 1):
        remaining -= hist[k]
        curve.append(remaining / len(ranks))
    return EvalCurve(curve, sum(ranks) / len(ranks) / size, ranks)


@dataclass
class GreedyOrder:
    order: list[int]
    covered: list[int]  # instances newly covered by each greedy pick


def greedy_construct(dataset: Dataset, d: int | None = None) -> GreedyOrder:
    """Repeatedly take the subtree holding solutions for most of the still
    uncovered instances (ties to the lowest index); the unused subtrees
    follow in ALDS order."""
    if d is None:
        d = dataset.meta.get("d")
    if d is None:
        raise ValueError("empty dataset needs an explicit depth")
    size = 1 << d
    remaining = [r.bits for r in dataset.records if r.bits]
    picked: list[int] = []
    covered: list[int] = []
    while remaining:
        counts = [0] * size
        for bits in remaining:
            while bits:
                low = bits & -bits
                counts[low.bit_length() - 1] += 1
                bits ^= low
        best = max(range(size), key=lambda v: (counts[v], -v))
        picked.append(best)
        covered.append(counts[best])
        mask = 1 << best
        remaining = [b for b in remaining if not b & mask]
    used = set(picked)
    order = picked + [v for v in visit_order(StrategyKind.ALDS, d) if v not in used]
    return GreedyOrder(order, covered)


def shuffled_indices(count: int, seed: int) -> list[int]:
    rng = XorShift64Star(seed)
    idx = list(range(count))
    for i in range(count - 1, 0, -1):
        j = rng.below(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx


def split_half_eval(dataset: Dataset, seed: int) -> dict[str, float]:
    """Greedy built on a random half A versus ALDS, on A and on the rest B."""
    idx = shuffled_indices(len(dataset), seed)
    half = len(idx) // 2
    part_a = dataset.subset(sorted(idx[:half]))
    part_b = dataset.subset(sorted(idx[half:]))
    d = dataset.d
    greedy = greedy_construct(part_a, d).order
    alds = visit_order(StrategyKind.ALDS, d)
    return {
        "greedy_a_on_a": evaluate(greedy, part_a).e_star,
        "alds_on_a": evaluate(alds, part_a).e_star,
        "greedy_a_on_b": evaluate(greedy, part_b).e_star,
        "alds_on_b": evaluate(alds, part_b).e_star,
        "size_a": len(part_a),
        "size_b": len(part_b),
    }


def linear_sweep(dataset: Dataset, y: float, xs: Iterable[float], skip_dead: bool = False) -> dict[float, float]:
    """e_star of the descending-probability order of each linear profile y + x*level."""
    d = dataset.d
    return {x: evaluate(profile_order(DepthProfile.linear(y, x, d)), dataset, skip_dead).e_star
            for x in xs}


def sign_test(a: Sequence[float], b: Sequence[float]) -> tuple[int, int, float]:
    """One-sided exact sign test of a < b over paired samples.

    Returns (wins, losses, p) where ties are dropped and p is
    P[Binomial(wins + losses, 1/2) >= wins].
    """
    wins = sum(x < y for x, y in zip(a, b))
    losses = sum(x > y for x, y in zip(a, b))
    n = wins + losses
    if n == 0:
        return 0, 0, 1.0
    p = sum(math.comb(n, k) for k in range(wins, n + 1)) / 2**n
    return wins, losses, p


def default_jobs() -> int:
    env = os.environ.get("LASAT_JOBS")
    if env:
        return max(1, int(env))
    return 1

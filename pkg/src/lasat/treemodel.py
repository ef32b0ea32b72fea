"""Single-goal probabilistic model of a binary search tree.

Every branching level has a heuristic probability p that the preferred
child holds the goal. The goal probability of the leaf with path code b is
the product over levels of p (left) or 1 - p (right); with one goal in the
tree these sum to one. Levels are numbered from 1 at the root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .orders import StrategyKind, is_permutation, visit_order

ALL_STRATEGIES = (StrategyKind.DFS, StrategyKind.DDS, StrategyKind.ILDS, StrategyKind.ALDS)


@dataclass(frozen=True)
class DepthProfile:
    p: tuple[float, ...]

    def __post_init__(self):
        for level, q in enumerate(self.p, start=1):
            if not 0 < q <= 1:
                raise ValueError(f"level {level}: heuristic probability {q} not in (0, 1]")

    @property
    def d(self) -> int:
        return len(self.p)

    @classmethod
    def linear(cls, y: float, x: float, d: int) -> DepthProfile:
        """p at level l (1-based) is y + x * l."""
        return cls(tuple(y + x * level for level in range(1, d + 1)))

    @classmethod
    def of(cls, values: Iterable[float]) -> DepthProfile:
        return cls(tuple(float(v) for v in values))


def leaf_probs(profile: DepthProfile) -> list[float]:
    probs = [1.0]
    for q in profile.p:
        nxt = []
        for g in probs:
            nxt.append(g * q)
            nxt.append(g * (1.0 - q))
        probs = nxt
    return probs


def _exact_leaf_probs(profile: DepthProfile) -> list[Fraction]:
    probs = [Fraction(1)]
    for q in profile.p:
        fq = Fraction(q)
        rq = 1 - fq
        probs = [g * f for g in probs for f in (fq, rq)]
    return probs


def e_goal(order: Sequence[int], probs: Sequence[float]) -> float:
    """Expected normalized rank of the goal subtree: sum(rank * prob) / 2**d."""
    size = len(probs)
    if len(order) != size:
        raise ValueError(f"order has {len(order)} entries for {size} leaves")
    d = size.bit_length() - 1
    if 1 << d != size or not is_permutation(order, d):
        raise ValueError("order is not a permutation of the leaves")
    return math.fsum(rank * probs[v] for rank, v in enumerate(order, start=1)) / size


def optimal_order(probs: Sequence[float]) -> list[int]:
    """Leaves by decreasing goal probability, ties by index."""
    return sorted(range(len(probs)), key=lambda v: (-probs[v], v))


def profile_order(profile: DepthProfile) -> list[int]:
    """Descending-probability order for a profile with ties resolved exactly.

    Leaf probabilities are compared as exact rationals of the level
    probabilities, so leaves whose products are mathematically equal tie
    and fall back to index order regardless of float rounding.
    """
    exact = _exact_leaf_probs(profile)
    return sorted(range(len(exact)), key=lambda v: (-exact[v], v))


def unsolved_curve(order: Sequence[int], probs: Sequence[float]) -> list[float]:
    """Probability the goal is still unfound after k leaves, k = 0..2**d."""
    curve = [1.0]
    found = 0.0
    for v in order:
        found += probs[v]
        curve.append(max(0.0, 1.0 - found))
    return curve


def strategy_table(profile: DepthProfile,
                   strategies: Iterable[StrategyKind | str] = ALL_STRATEGIES,
                   include_optimal: bool = True) -> dict[str, float]:
    probs = leaf_probs(profile)
    table = {}
    for kind in strategies:
        kind = StrategyKind.parse(kind)
        table[kind.value] = e_goal(visit_order(kind, profile.d), probs)
    if include_optimal:
        table["optimal"] = e_goal(optimal_order(probs), probs)
    return table

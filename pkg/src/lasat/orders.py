"""Visiting orders over the 2**d subtrees rooted at the jump depth.

A subtree is addressed by its path code: d bits read MSB-first from the
root, 0 for the preferred (left) branch and 1 for a discrepancy. The code
read as a binary number is the leaf index, so DFS visits 0, 1, ..., 2**d-1.
"""

from __future__ import annotations

import enum

MAX_ORDER_DEPTH = 24


class StrategyKind(str, enum.Enum):
    DFS = "dfs"
    LDS = "lds"
    ILDS = "ilds"
    DDS = "dds"
    ALDS = "alds"

    @classmethod
    def parse(cls, value) -> StrategyKind:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def discrepancies(code: int | str) -> int:
    """Number of right branches on a path; accepts an int or a '0101' string."""
    if isinstance(code, str):
        return code.count("1")
    return bin(code).count("1")


def code_bits(index: int, d: int) -> str:
    return format(index, f"0{d}b") if d else ""


def deepest_discrepancy(index: int, d: int) -> int:
    """1-based level of the lowest discrepancy on the path, 0 if none."""
    if index == 0:
        return 0
    return d - (index & -index).bit_length() + 1


def _check_depth(d: int) -> None:
    if not 0 <= d <= MAX_ORDER_DEPTH:
        raise ValueError(f"depth {d} outside [0, {MAX_ORDER_DEPTH}]")


def visit_order(kind: StrategyKind | str, d: int) -> list[int]:
    """Leaf indices in the order the strategy visits them.

    DFS   index ascending.
    ILDS  by discrepancy count, then index (left to right).
    DDS   by deepest discrepancy level, then discrepancy count, then index.
    ALDS  by discrepancy count, then index descending (right to left).
    LDS   iteration k re-enumerates every leaf with at most k discrepancies,
          so the result has repeats and length sum_k |{leaves with <= k}|.
    """
    kind = StrategyKind.parse(kind)
    _check_depth(d)
    leaves = range(1 << d)
    if kind is StrategyKind.DFS:
        return list(leaves)
    popcount = [discrepancies(v) for v in leaves]
    if kind is StrategyKind.ILDS:
        return sorted(leaves, key=lambda v: (popcount[v], v))
    if kind is StrategyKind.ALDS:
        return sorted(leaves, key=lambda v: (popcount[v], -v))
    if kind is StrategyKind.DDS:
        return sorted(leaves, key=lambda v: (deepest_discrepancy(v, d), popcount[v], v))
    order = []
    for k in range(d + 1):
        order.extend(v for v in leaves if popcount[v] <= k)
    return order


def is_permutation(order, d: int) -> bool:
    n = 1 << d
    return len(order) == n and len(set(order)) == n and all(0 <= v < n for v in order)


def ranks(order) -> list[int]:
    """rank[v] = 1-based position of leaf v in a permutation order."""
    rank = [0] * len(order)
    for pos, v in enumerate(order, start=1):
        rank[v] = pos
    return rank

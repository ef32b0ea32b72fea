"""Recursive literal weights, look-ahead evaluation and branching decisions."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cnf import Assignment, Clause, Formula, unit_propagate

MAX_ITERATIONS = 16


class UnsupportedWidthError(ValueError):
    pass


@dataclass(frozen=True)
class HeuristicConfig:
    combiner: str = "product"
    iterations: int = 3
    gamma: float = 3.3
    failed_literal_detection: bool = True

    def __post_init__(self):
        if self.combiner not in ("product", "sum"):
            raise ValueError(f"unknown combiner {self.combiner!r}")
        if not 0 <= self.iterations <= MAX_ITERATIONS:
            raise ValueError(f"iterations must be in [0, {MAX_ITERATIONS}]")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def named(cls, name: str, iterations: int = 3, **kw) -> HeuristicConfig:
        """Build from a short name: w0x, w1plus, w1x, wix (uses ``iterations``)
        or an explicit wNx such as w3x."""
        name = name.lower()
        if name == "w0x":
            return cls("product", 0, **kw)
        if name == "w1plus":
            return cls("sum", 1, **kw)
        if name == "wix":
            return cls("product", iterations, **kw)
        m = re.fullmatch(r"w(\d+)x", name)
        if m:
            return cls("product", int(m.group(1)), **kw)
        raise ValueError(f"unknown heuristic {name!r}")

    @property
    def name(self) -> str:
        if self.combiner == "sum":
            return f"w{self.iterations}plus"
        return f"w{self.iterations}x"


@dataclass
class LiteralWeightTable:
    h: list[float]
    mu: float
    free_vars: tuple[int, ...]

    def __getitem__(self, lit: int) -> float:
        return self.h[lit]

    def scaled(self, c: float) -> LiteralWeightTable:
        return LiteralWeightTable([x * c for x in self.h], self.mu * c, self.free_vars)


def _view_vars(view: Sequence[Clause]) -> tuple[int, ...]:
    seen = set()
    for c in view:
        for lit in c:
            seen.add(lit if lit > 0 else -lit)
    return tuple(sorted(seen))


def compute_weights(view: Iterable[Clause], config: HeuristicConfig,
                    num_vars: int | None = None) -> LiteralWeightTable:
    """Iterate the recursive weights ``config.iterations`` times on a view.

    h_0 is 1 everywhere; each round rescales by the mean over both literals
    of the view's variables, then

        h'(x) = sum over (x|y|z) of h(-y)/mu * h(-z)/mu
              + gamma * sum over (x|y) of h(-y)/mu

    Literals outside the view end up at 0 once iterations >= 1.
    """
    view = list(view)
    for c in view:
        if len(c) > 3:
            raise UnsupportedWidthError(f"clause of width {len(c)} in view: {c}")
    free = _view_vars(view)
    if num_vars is None:
        num_vars = free[-1] if free else 0
    size = 2 * num_vars + 1
    h = [1.0] * size
    h[0] = 0.0
    gamma = config.gamma
    nfree = len(free)
    mu = 1.0
    for _ in range(config.iterations):
        if nfree:
            mu = sum(h[v] + h[-v] for v in free) / (2 * nfree)
        inv = 1.0 / mu if mu > 0 else 0.0
        nxt = [0.0] * size
        for c in view:
            if len(c) == 3:
                a, b, d = c
                wa = h[-a] * inv
                wb = h[-b] * inv
                wd = h[-d] * inv
                nxt[a] += wb * wd
                nxt[b] += wa * wd
                nxt[d] += wa * wb
            elif len(c) == 2:
                a, b = c
                nxt[a] += gamma * h[-b] * inv
                nxt[b] += gamma * h[-a] * inv
        h = nxt
    if nfree:
        mu = sum(h[v] + h[-v] for v in free) / (2 * nfree)
    return LiteralWeightTable(h, mu, free)


def clause_weight(clause: Clause, table: LiteralWeightTable, config: HeuristicConfig) -> float:
    """Weight of a newly created binary clause (y | z)."""
    if len(clause) != 2:
        raise UnsupportedWidthError(f"clause weight needs a binary clause, got {clause}")
    y, z = clause
    if config.combiner == "sum":
        return table.h[-y] + table.h[-z]
    return table.h[-y] * table.h[-z]


class Forced(enum.Enum):
    NONE = "none"
    MUST_TRUE = "must_true"
    MUST_FALSE = "must_false"
    BOTH_FAIL = "both_fail"


@dataclass(frozen=True)
class VarLookahead:
    diff_false: float
    diff_true: float
    forced: Forced = Forced.NONE


@dataclass
class LookaheadResult:
    entries: dict[int, VarLookahead]

    @property
    def dead(self) -> bool:
        return any(e.forced is Forced.BOTH_FAIL for e in self.entries.values())

    @property
    def forced_literals(self) -> list[int]:
        lits = []
        for var, e in self.entries.items():
            if e.forced is Forced.MUST_TRUE:
                lits.append(var)
            elif e.forced is Forced.MUST_FALSE:
                lits.append(-var)
        return lits


def _diff(formula: Formula, assignment: Assignment, start: int,
          table: LiteralWeightTable, combiner: str) -> float:
    # A 3-clause holding a literal falsified in this look-ahead is new iff
    # its two other literals are still free: they were then free at the node.
    val = assignment.val
    h = table.h
    pairs = formula.ternary_pairs
    total = 0.0
    trail = assignment.trail
    if combiner == "sum":
        for i in range(start, len(trail)):
            for y, z in pairs[-trail[i]]:
                if val[y] == 0 and val[z] == 0:
                    total += h[-y] + h[-z]
    else:
        for i in range(start, len(trail)):
            for y, z in pairs[-trail[i]]:
                if val[y] == 0 and val[z] == 0:
                    total += h[-y] * h[-z]
    return total


def lookahead_all(formula: Formula, assignment: Assignment, table: LiteralWeightTable,
                  config: HeuristicConfig, variables: Iterable[int] | None = None) -> LookaheadResult:
    """One look-ahead pass over the free variables of the node's view.

    Each variable is tried false then true, measured and rolled back. The
    assignment is unchanged on return; failed literals are reported through
    ``forced`` and left for the caller to apply after the pass.
    """
    if variables is None:
        variables = table.free_vars
    detect = config.failed_literal_detection
    trail = assignment.trail
    val = assignment.val
    entries: dict[int, VarLookahead] = {}
    for var in variables:
        if val[var]:
            continue
        diffs = []
        failed = []
        for lit in (-var, var):
            start = len(trail)
            outcome = unit_propagate(formula, assignment, lit)
            if outcome.conflict and detect:
                diffs.append(0.0)
                failed.append(True)
            else:
                diffs.append(_diff(formula, assignment, start, table, config.combiner))
                failed.append(False)
            assignment.undo_to(start)
        if failed[0] and failed[1]:
            forced = Forced.BOTH_FAIL
        elif failed[0]:
            forced = Forced.MUST_TRUE
        elif failed[1]:
            forced = Forced.MUST_FALSE
        else:
            forced = Forced.NONE
        entries[var] = VarLookahead(diffs[0], diffs[1], forced)
    return LookaheadResult(entries)


@dataclass(frozen=True)
class Decision:
    variable: int
    first_value: bool

    @property
    def first_literal(self) -> int:
        return self.variable if self.first_value else -self.variable


class NoDecisionError(ValueError):
    pass


def select_decision(result: LookaheadResult, assignment: Assignment | None = None) -> Decision:
    """Max product of the two diffs, then max sum, then lowest index.

    The first branch is the side with the smaller diff; ties go to false.
    Forced variables, and variables assigned in ``assignment``, are skipped.
    """
    best = None
    best_key = None
    for var, e in result.entries.items():
        if e.forced is not Forced.NONE:
            continue
        if assignment is not None and assignment.val[var]:
            continue
        key = (e.diff_false * e.diff_true, e.diff_false + e.diff_true, -var)
        if best_key is None or key > best_key:
            best, best_key = var, key
    if best is None:
        raise NoDecisionError("no free unforced variable to branch on")
    e = result.entries[best]
    return Decision(best, e.diff_true < e.diff_false)

"""Look-ahead DPLL with discrepancy-ordered traversal of the top levels.

The top ``d`` branching levels are addressed by path codes (see
:mod:`lasat.orders`). Each visited code is replayed from the root; below
the jump depth the subtree is searched depth-first. Decisions are a pure
function of the assignment, so a replay reaches the same nodes every time;
node evaluations and branch propagations are cached per prefix so a replay
only re-applies the recorded literals.

A node that is settled (satisfied or refuted) before all ``d`` bits are
consumed stops the replay there: codes address branch decisions, not tree
depth.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, field

from .cnf import Assignment, Formula, reduced_view, unit_propagate
from .heuristics import (
    Decision,
    HeuristicConfig,
    compute_weights,
    lookahead_all,
    select_decision,
)
from .orders import StrategyKind, code_bits, visit_order

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8


class BudgetExhausted(RuntimeError):
    pass


class _Settled:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


SAT = _Settled("SAT")
DEAD = _Settled("DEAD")


class Engine:
    """Single-owner search state: one assignment plus node bookkeeping."""

    def __init__(self, formula: Formula, config: HeuristicConfig | None = None,
                 budget: int = DEFAULT_BUDGET):
        self.formula = formula
        self.config = config or HeuristicConfig()
        self.budget = budget
        self.assignment = Assignment(formula.num_vars)
        self.nodes = 0
        limit = 4 * formula.num_vars + 1000
        if sys.getrecursionlimit() < limit:
            sys.setrecursionlimit(limit)

    def propagate_units(self) -> bool:
        """Apply the formula's unit clauses; False on conflict."""
        asg = self.assignment
        for lit in self.formula.unit_literals:
            v = asg.val[lit]
            if v == 1:
                continue
            if v == -1 or unit_propagate(self.formula, asg, lit).conflict:
                return False
        return True

    def expand(self):
        """Evaluate the current node: SAT, DEAD or a Decision.

        Failed literals found by the look-ahead pass are assigned on the
        trail before returning.
        """
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExhausted(f"node budget {self.budget} exceeded")
        formula, asg = self.formula, self.assignment
        view = list(reduced_view(formula, asg))
        if not view:
            return SAT
        table = compute_weights(view, self.config, formula.num_vars)
        result = lookahead_all(formula, asg, table, self.config)
        if result.dead:
            return DEAD
        forced = result.forced_literals
        if forced:
            val = asg.val
            for lit in forced:
                if val[lit] == 1:
                    continue
                if val[lit] == -1 or unit_propagate(formula, asg, lit).conflict:
                    return DEAD
            if next(reduced_view(formula, asg), None) is None:
                return SAT
        return select_decision(result, asg)

    def dfs(self) -> bool:
        """Plain look-ahead DPLL below the current node. On success the
        assignment is left holding the model."""
        asg = self.assignment
        mark = len(asg.trail)
        node = self.expand()
        if node is SAT:
            return True
        if node is not DEAD:
            lit = node.first_literal
            for branch in (lit, -lit):
                m = len(asg.trail)
                if not unit_propagate(self.formula, asg, branch).conflict and self.dfs():
                    return True
                asg.undo_to(m)
        asg.undo_to(mark)
        return False

    def model(self) -> dict[int, bool]:
        return self.assignment.model(default=False)


def _extension_mask(prefix: str, d: int) -> int:
    rest = d - len(prefix)
    first = (int(prefix, 2) if prefix else 0) << rest
    return ((1 << (1 << rest)) - 1) << first


@dataclass
class SolveReport:
    status: str  # "sat", "unsat" or "budget-exhausted"
    model: dict[int, bool] | None = None
    subtrees_entered: int = 0
    subtrees_skipped: int = 0
    rank_of_first_solution: int | None = None
    nodes_expanded: int = 0

    @property
    def sat(self) -> bool:
        return self.status == "sat"


class _Replayer:
    """Re-descends path codes from the root with per-prefix caches."""

    def __init__(self, engine: Engine, d: int):
        self.engine = engine
        self.d = d
        self.root_mark = len(engine.assignment.trail)
        self.nodes: dict[str, tuple[object, tuple[int, ...]]] = {}
        self.edges: dict[str, tuple[int, ...] | None] = {}
        self.dead: set[str] = set()

    def _replay(self, lits):
        asg = self.engine.assignment
        val, trail = asg.val, asg.trail
        for lit in lits:
            val[lit] = 1
            val[-lit] = -1
            trail.append(lit)

    def is_dead(self, code: str) -> bool:
        dead = self.dead
        return any(code[:i] in dead for i in range(len(code) + 1))

    def reach(self, code: str):
        """Walk ``code`` from the root, leaving the assignment at the
        subtree root. Returns SAT or DEAD if the path settles early, else
        None."""
        engine = self.engine
        asg = engine.assignment
        asg.undo_to(self.root_mark)
        prefix = ""
        for bit in code:
            cached = self.nodes.get(prefix)
            if cached is None:
                mark = len(asg.trail)
                node = engine.expand()
                self.nodes[prefix] = (node, tuple(asg.trail[mark:]))
            else:
                node, segment = cached
                if node is not DEAD:
                    self._replay(segment)
            if node is SAT:
                return SAT
            if node is DEAD:
                self.dead.add(prefix)
                return DEAD
            child = prefix + bit
            lit = node.first_literal if bit == "0" else -node.first_literal
            if child in self.edges:
                segment = self.edges[child]
                if segment is None:
                    self.dead.add(child)
                    return DEAD
                self._replay(segment)
            else:
                mark = len(asg.trail)
                if unit_propagate(engine.formula, asg, lit).conflict:
                    self.edges[child] = None
                    self.dead.add(child)
                    return DEAD
                self.edges[child] = tuple(asg.trail[mark:])
            prefix = child
        return None

    def descend(self, code: str):
        """SAT if the subtree addressed by ``code`` holds a model, else DEAD."""
        settled = self.reach(code)
        if settled is not None:
            return settled
        return SAT if self.engine.dfs() else DEAD


def solve(formula: Formula, config: HeuristicConfig | None = None,
          kind: StrategyKind | str = StrategyKind.ALDS, d: int = 0,
          budget: int = DEFAULT_BUDGET, skip_dead: bool = True) -> SolveReport:
    """Find a model, visiting the 2**d jump-depth subtrees in ``kind`` order.

    ``rank_of_first_solution`` is the raw 1-based position in the visit
    order; with ``skip_dead`` codes below a known dead prefix are counted in
    ``subtrees_skipped`` rather than descended.
    """
    kind = StrategyKind.parse(kind)
    if kind is StrategyKind.LDS:
        raise ValueError("LDS is only available as an order generator")
    if d < 0:
        raise ValueError("jump depth must be non-negative")
    engine = Engine(formula, config, budget)
    report = SolveReport("unsat")
    if not engine.propagate_units():
        return report
    replayer = _Replayer(engine, d)
    try:
        for pos, leaf in enumerate(visit_order(kind, d), start=1):
            code = code_bits(leaf, d)
            if skip_dead and replayer.is_dead(code):
                report.subtrees_skipped += 1
                continue
            report.subtrees_entered += 1
            if replayer.descend(code) is SAT:
                report.status = "sat"
                report.model = engine.model()
                report.rank_of_first_solution = pos
                if not formula.is_satisfied_by(report.model):
                    raise AssertionError("solver produced a non-model")
                break
    except BudgetExhausted:
        report.status = "budget-exhausted"
    report.nodes_expanded = engine.nodes
    return report


def dpll(formula: Formula, config: HeuristicConfig | None = None,
         budget: int = DEFAULT_BUDGET) -> SolveReport:
    """Plain depth-first look-ahead DPLL (no jump depth)."""
    engine = Engine(formula, config, budget)
    report = SolveReport("unsat")
    try:
        if engine.propagate_units() and engine.dfs():
            report.status = "sat"
            report.model = engine.model()
            report.rank_of_first_solution = 1
        report.subtrees_entered = 1
    except BudgetExhausted:
        report.status = "budget-exhausted"
    report.nodes_expanded = engine.nodes
    return report


@dataclass
class SubtreeScan:
    d: int
    bits: int = 0
    dead_prefixes: list[str] = field(default_factory=list)
    nodes_expanded: int = 0

    @property
    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def has_solution(self, leaf: int) -> bool:
        return bool(self.bits >> leaf & 1)

    def hex(self) -> str:
        return format(self.bits, "x")


def map_subtrees(formula: Formula, config: HeuristicConfig | None = None, d: int = 8,
                 budget: int = DEFAULT_BUDGET) -> SubtreeScan:
    """Explore the whole tree and mark which depth-d subtrees hold a model.

    Each subtree's DFS stops at its first model. Refuted prefixes leave their
    extensions unset and are listed in ``dead_prefixes``; a prefix satisfied
    before depth d marks every extension. Raises BudgetExhausted.
    """
    if d < 1:
        raise ValueError("map depth must be at least 1")
    engine = Engine(formula, config, budget)
    scan = SubtreeScan(d)
    asg = engine.assignment

    def walk(prefix: str) -> None:
        mark = len(asg.trail)
        node = engine.expand()
        if node is SAT:
            scan.bits |= _extension_mask(prefix, d)
        elif node is DEAD:
            scan.dead_prefixes.append(prefix)
        else:
            for bit in "01":
                lit = node.first_literal if bit == "0" else -node.first_literal
                child = prefix + bit
                m = len(asg.trail)
                if unit_propagate(formula, asg, lit).conflict:
                    scan.dead_prefixes.append(child)
                elif len(child) == d:
                    if engine.dfs():
                        scan.bits |= 1 << int(child, 2)
                else:
                    walk(child)
                asg.undo_to(m)
        asg.undo_to(mark)

    if engine.propagate_units():
        walk("")
    else:
        scan.dead_prefixes.append("")
    scan.nodes_expanded = engine.nodes
    return scan

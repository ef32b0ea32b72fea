"""CNF formulas, DIMACS I/O, random k-SAT generation and unit propagation.

Literals are non-zero ints in DIMACS convention: ``v`` is the positive
occurrence of variable ``v`` and ``-v`` its negation. Clauses are tuples of
literals. Per-literal arrays are plain lists of length ``2n + 1`` indexed
directly by the literal; negative literals land in the upper half through
Python's negative indexing (``a[-v] is a[2n + 1 - v]``).
"""

from __future__ import annotations

import enum
import io
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Iterator, Sequence

from .rng import XorShift64Star

log = logging.getLogger(__name__)

Clause = tuple[int, ...]


class DimacsError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def lit_var(lit: int) -> int:
    return lit if lit > 0 else -lit


def normalize_clause(lits: Iterable[int]) -> Clause | None:
    """Drop duplicate literals, keeping first occurrences in order.

    Returns None for a tautology (clause containing ``x`` and ``-x``).
    """
    seen: dict[int, None] = {}
    for lit in lits:
        if -lit in seen:
            return None
        seen[lit] = None
    return tuple(seen)


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: tuple[Clause, ...]
    comments: tuple[str, ...] = ()
    tautologies_removed: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for i, c in enumerate(self.clauses):
            if not c:
                raise ValueError(f"clause {i} is empty")
            for lit in c:
                if lit == 0 or lit_var(lit) > self.num_vars:
                    raise ValueError(f"clause {i}: literal {lit} out of range")
            if len(set(c)) != len(c) or any(-lit in c for lit in c):
                raise ValueError(f"clause {i} is not normalized: {c}")

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Iterable[int]], comments=()) -> Formula:
        kept = []
        dropped = 0
        for c in clauses:
            nc = normalize_clause(c)
            if nc is None:
                dropped += 1
            else:
                kept.append(nc)
        return cls(num_vars, tuple(kept), tuple(comments), dropped)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @cached_property
    def occurrences(self) -> list[list[Clause]]:
        """occurrences[lit] lists, in clause order, the *other* literals of
        every clause containing ``lit``."""
        occ: list[list[Clause]] = [[] for _ in range(2 * self.num_vars + 1)]
        for c in self.clauses:
            for i, lit in enumerate(c):
                occ[lit].append(c[:i] + c[i + 1:])
        return occ

    @cached_property
    def ternary_pairs(self) -> list[list[tuple[int, int]]]:
        """ternary_pairs[lit]: the two other literals of each 3-clause with ``lit``."""
        pairs: list[list[tuple[int, int]]] = [[] for _ in range(2 * self.num_vars + 1)]
        for c in self.clauses:
            if len(c) == 3:
                a, b, d = c
                pairs[a].append((b, d))
                pairs[b].append((a, d))
                pairs[d].append((a, b))
        return pairs

    @cached_property
    def unit_literals(self) -> tuple[int, ...]:
        return tuple(c[0] for c in self.clauses if len(c) == 1)

    def is_satisfied_by(self, model: dict[int, bool] | Sequence[int]) -> bool:
        return satisfies(self.clauses, model)


def satisfies(clauses: Iterable[Iterable[int]], model) -> bool:
    """True iff every clause has a true literal under ``model``.

    ``model`` is a dict var -> bool or an iterable of true literals.
    """
    if not isinstance(model, dict):
        model = {lit_var(l): l > 0 for l in model}
    for c in clauses:
        if not any(model.get(lit_var(l), False) == (l > 0) for l in c if lit_var(l) in model):
            return False
    return True


# -- DIMACS ------------------------------------------------------------------

def iter_dimacs(source: str | bytes | IO) -> tuple[int, int, list[str], list[list[int]]]:
    """Raw DIMACS reader: header counts, comments and clauses as written."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    header = None
    comments: list[str] = []
    clauses: list[list[int]] = []
    current: list[int] = []
    current_line = 0
    lineno = 0
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            comments.append(line[1:].strip())
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if n < 0 or m < 0:
                raise DimacsError("negative counts in header", lineno)
            header = (n, m)
            continue
        if header is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad token {tok!r}", lineno) from None
            if lit == 0:
                if not current:
                    raise DimacsError("empty clause", lineno)
                clauses.append(current)
                current = []
                continue
            if abs(lit) > header[0]:
                raise DimacsError(f"literal {lit} exceeds {header[0]} variables", lineno)
            if not current:
                current_line = lineno
            current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' header", lineno or None)
    if current:
        raise DimacsError("clause not terminated by 0", current_line)
    if len(clauses) != header[1]:
        raise DimacsError(f"header declares {header[1]} clauses, found {len(clauses)}", lineno)
    return header[0], header[1], comments, clauses


def parse_dimacs(source: str | bytes | IO) -> Formula:
    n, _, comments, clauses = iter_dimacs(source)
    formula = Formula.from_clauses(n, clauses, comments)
    if formula.tautologies_removed:
        log.warning("removed %d tautological clause(s)", formula.tautologies_removed)
    return formula


def write_dimacs(formula: Formula, out: IO | None = None) -> str:
    lines = [f"c {c}".rstrip() for c in formula.comments]
    lines.append(f"p cnf {formula.num_vars} {formula.num_clauses}")
    lines.extend(" ".join(map(str, c)) + " 0" for c in formula.clauses)
    text = "\n".join(lines) + "\n"
    if out is not None:
        out.write(text)
    return text


def generate_uniform_ksat(n: int, m: int, k: int = 3, seed: int = 0) -> Formula:
    """Uniform random k-SAT: each clause draws k distinct variables and a fair
    sign per literal from :class:`~lasat.rng.XorShift64Star`.

    Variables are drawn in sequence with duplicates redrawn, which is uniform
    over ordered k-subsets. Duplicate clauses are allowed.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise ValueError(f"clause width k={k} exceeds variable count n={n}")
    if m < 0:
        raise ValueError("m must be non-negative")
    rng = XorShift64Star(seed)
    clauses = []
    for _ in range(m):
        chosen: list[int] = []
        while len(chosen) < k:
            v = rng.below(n) + 1
            if v not in chosen:
                chosen.append(v)
        clauses.append(tuple(v if rng.coin() else -v for v in chosen))
    comment = f"generator seed={seed} n={n} m={m} k={k} prng=xorshift64*"
    return Formula(n, tuple(clauses), (comment,))


# -- assignments and propagation ---------------------------------------------

class Status(enum.Enum):
    CONSISTENT = "consistent"
    CONFLICT = "conflict"


@dataclass(frozen=True)
class PropagationOutcome:
    status: Status
    implied: tuple[int, ...]

    @property
    def conflict(self) -> bool:
        return self.status is Status.CONFLICT


class Assignment:
    """Tri-state assignment with an undo trail.

    ``val[lit]`` is 1 if lit is true, -1 if false, 0 if unassigned; both
    polarities are kept in sync.
    """

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.val = [0] * (2 * num_vars + 1)
        self.trail: list[int] = []
        self.marks: list[int] = []

    def value(self, lit: int) -> bool | None:
        v = self.val[lit]
        return None if v == 0 else v > 0

    def assign(self, lit: int) -> None:
        if self.val[lit]:
            raise ValueError(f"variable {lit_var(lit)} already assigned")
        self.val[lit] = 1
        self.val[-lit] = -1
        self.trail.append(lit)

    def undo_to(self, size: int) -> None:
        val, trail = self.val, self.trail
        while len(trail) > size:
            lit = trail.pop()
            val[lit] = 0
            val[-lit] = 0

    def push_mark(self) -> None:
        self.marks.append(len(self.trail))

    def pop_mark(self) -> None:
        self.undo_to(self.marks.pop())

    @property
    def level(self) -> int:
        return len(self.marks)

    def is_free(self, var: int) -> bool:
        return self.val[var] == 0

    def free_vars(self) -> list[int]:
        val = self.val
        return [v for v in range(1, self.num_vars + 1) if val[v] == 0]

    def snapshot(self) -> tuple[int, ...]:
        return tuple(self.val[1:self.num_vars + 1])

    def model(self, default: bool = False) -> dict[int, bool]:
        val = self.val
        return {v: (val[v] > 0) if val[v] else default for v in range(1, self.num_vars + 1)}


def unit_propagate(formula: Formula, assignment: Assignment, lit: int) -> PropagationOutcome:
    """Assign ``lit`` and propagate unit clauses to fixpoint or conflict.

    Implied literals are appended to the trail breadth-first, scanning each
    falsified literal's occurrence list in clause order. On conflict the
    partial trail is left in place for the caller to undo.
    """
    val = assignment.val
    if val[lit]:
        raise ValueError(f"variable {lit_var(lit)} already assigned")
    trail = assignment.trail
    occ = formula.occurrences
    start = len(trail)
    val[lit] = 1
    val[-lit] = -1
    trail.append(lit)
    head = start
    while head < len(trail):
        falsified = -trail[head]
        head += 1
        for others in occ[falsified]:
            unit = 0
            for x in others:
                v = val[x]
                if v == 1:
                    break
                if v == 0:
                    if unit:
                        break
                    unit = x
            else:
                if not unit:
                    return PropagationOutcome(Status.CONFLICT, tuple(trail[start:]))
                val[unit] = 1
                val[-unit] = -1
                trail.append(unit)
    return PropagationOutcome(Status.CONSISTENT, tuple(trail[start:]))


def reduced_view(formula: Formula, assignment: Assignment) -> Iterator[Clause]:
    """Residual clauses: satisfied ones dropped, falsified literals removed."""
    val = assignment.val
    for c in formula.clauses:
        residual = []
        for lit in c:
            v = val[lit]
            if v == 1:
                break
            if v == 0:
                residual.append(lit)
        else:
            yield tuple(residual)

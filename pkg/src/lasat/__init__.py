"""Look-ahead DPLL for random 3-SAT with discrepancy-ordered search,
a single-goal tree cost model and a subtree-map experiment harness."""

from .cnf import Formula, generate_uniform_ksat, parse_dimacs, write_dimacs
from .heuristics import HeuristicConfig
from .orders import StrategyKind, visit_order
from .search import SolveReport, dpll, map_subtrees, solve

__all__ = [
    "Formula",
    "HeuristicConfig",
    "SolveReport",
    "StrategyKind",
    "dpll",
    "generate_uniform_ksat",
    "map_subtrees",
    "parse_dimacs",
    "solve",
    "visit_order",
    "write_dimacs",
]
__version__ = "0.1.0"

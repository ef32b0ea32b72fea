"""One test per acceptance criterion, each at its stated tolerance and time
limit. A PASS/FAIL line per criterion is printed in the terminal summary."""

import random
import time

import pytest

from conftest import FOUR_VAR_CLAUSES
from oracles import brute_sat
from lasat.cnf import Assignment, Formula, generate_uniform_ksat, reduced_view, unit_propagate
from lasat.experiment import (
    Dataset,
    build_dataset,
    config_from_meta,
    default_jobs,
    evaluate,
    greedy_construct,
    rebuild_record,
    sign_test,
    split_half_eval,
)
from lasat.heuristics import (
    Forced,
    HeuristicConfig,
    NoDecisionError,
    compute_weights,
    lookahead_all,
    select_decision,
)
from lasat.orders import StrategyKind, discrepancies, is_permutation, visit_order
from lasat.search import dpll, solve
from lasat.treemodel import DepthProfile, e_goal, leaf_probs, optimal_order, strategy_table

SOLVING = [StrategyKind.DFS, StrategyKind.ILDS, StrategyKind.DDS, StrategyKind.ALDS]
SKEWED_LEAVES = [0.504, 0.056, 0.126, 0.014, 0.216, 0.024, 0.054, 0.006]


@pytest.fixture(scope="module")
def desk_dataset():
    """200 satisfiable instances, n=100, m=426, d=8, seeds from 0."""
    start = time.perf_counter()
    ds = build_dataset(200, n=100, ratio=4.26, d=8, seed0=0, config=HeuristicConfig(),
                       jobs=default_jobs())
    return ds, time.perf_counter() - start


def test_criterion_1_depth_three_table(record_property):
    record_property("criterion", "1. E_goal depth-3 table")
    expected = {"dfs": 0.3375, "ilds": 0.31225, "dds": 0.26375, "alds": 0.26225}
    orders = {k: visit_order(k, 3) for k in expected}
    best = float("inf")
    for _ in range(20):
        t = time.perf_counter()
        got = {k: e_goal(o, SKEWED_LEAVES) for k, o in orders.items()}
        best = min(best, time.perf_counter() - t)
    record_property("detail", ", ".join(f"{k} {v:.6f}" for k, v in got.items()) + f"; {best * 1e6:.0f} us")
    for k, v in expected.items():
        assert abs(got[k] - v) <= 1e-9, k
    assert best < 1e-3


def test_criterion_2_depth_twelve_model(record_property):
    record_property("criterion", "2. depth-12 linear model strategy table")
    t = time.perf_counter()
    table = strategy_table(DepthProfile.linear(0.56, 0.015, 12))
    elapsed = time.perf_counter() - t
    record_property("detail", ", ".join(f"{k} {v:.6f}" for k, v in table.items()) + f"; {elapsed:.3f} s")
    expected = {"dfs": 0.410188, "dds": 0.267444, "ilds": 0.228320, "alds": 0.207261, "optimal": 0.200357}
    for k, v in expected.items():
        assert abs(table[k] - v) <= 1e-4, k
    assert elapsed < 1.0


def test_criterion_3_four_var_lookahead(record_property):
    record_property("criterion", "3. four-variable look-ahead worked example")
    f = Formula.from_clauses(4, FOUR_VAR_CLAUSES)
    a = Assignment(4)
    cfg = HeuristicConfig.named("w0x")
    result = lookahead_all(f, a, compute_weights(reduced_view(f, a), cfg, 4), cfg)
    e = result.entries
    decision = select_decision(result)
    diffs = {v: (e[v].diff_false, e[v].diff_true) for v in (1, 2, 4)}
    shown = {v: tuple(int(x) for x in d) for v, d in diffs.items()}
    record_property("detail", f"diffs {shown}, x3 {e[3].forced.name}, decision x{decision.variable}")
    assert diffs == {1: (3, 1), 2: (2, 2), 4: (2, 1)}
    assert all(isinstance(x, int) or float(x).is_integer() for d in diffs.values() for x in d)
    assert e[3].forced is Forced.MUST_TRUE
    assert unit_propagate(f, Assignment(4), -3).conflict
    assert decision.variable == 2
    assert e[2].diff_false * e[2].diff_true == 4


def test_criterion_4_soundness_completeness(record_property):
    record_property("criterion", "4. status vs truth-table oracle, 500 instances")
    t = time.perf_counter()
    rng = random.Random(2024)
    agree = models = runs = 0
    for i in range(500):
        n = rng.randint(5, 20)
        m = round(rng.uniform(3.5, 5.5) * n)
        f = generate_uniform_ksat(n, m, 3, seed=i)
        truth = brute_sat(n, f.clauses)
        d = rng.randint(0, 6)
        for kind in SOLVING:
            report = solve(f, HeuristicConfig(), kind, d)
            runs += 1
            agree += report.sat == truth
            if report.sat:
                assert f.is_satisfied_by(report.model)
                models += 1
    elapsed = time.perf_counter() - t
    record_property("detail", f"{agree}/{runs} agree, {models} models verified; {elapsed:.1f} s")
    assert agree == runs
    assert elapsed < 120


def test_criterion_5_order_properties(record_property):
    record_property("criterion", "5. visit-order permutations and ALDS rules, d <= 12")
    t = time.perf_counter()
    for d in range(13):
        for kind in SOLVING:
            assert is_permutation(visit_order(kind, d), d), (kind, d)
        order = visit_order("alds", d)
        for a, b in zip(order, order[1:]):
            assert discrepancies(a) <= discrepancies(b)
            if discrepancies(a) == discrepancies(b):
                assert a > b
    elapsed = time.perf_counter() - t
    record_property("detail", f"{elapsed:.2f} s")
    assert elapsed < 10


def test_criterion_6_heuristic_identities(record_property):
    record_property("criterion", "6. weight identities and scale invariance")
    rng = random.Random(6)
    for seed in range(100):
        n = rng.randint(10, 60)
        f = generate_uniform_ksat(n, rng.randint(n, 5 * n), 3, seed)
        table = compute_weights(f.clauses, HeuristicConfig("product", 1), n)
        for v in table.free_vars:
            assert table[v] == sum(v in c for c in f.clauses)
            assert table[-v] == sum(-v in c for c in f.clauses)
        for iterations in range(6):
            t = compute_weights(f.clauses, HeuristicConfig("product", iterations), n)
            total = sum(t[v] + t[-v] for v in t.free_vars)
            expected = 2 * len(t.free_vars) * t.mu
            assert abs(total - expected) <= 1e-9 * expected
    checked = 0
    for seed in range(100):
        n = rng.randint(10, 40)
        f = generate_uniform_ksat(n, round(4.26 * n), 3, 1000 + seed)
        cfg = HeuristicConfig.named(rng.choice(["w1x", "w2x", "w3x", "w1plus"]))
        a = Assignment(n)
        for _ in range(rng.randint(0, 3)):
            lit = rng.choice(a.free_vars()) * rng.choice((1, -1))
            mark = len(a.trail)
            if unit_propagate(f, a, lit).conflict:
                a.undo_to(mark)
        table = compute_weights(reduced_view(f, a), cfg, n)
        c = rng.uniform(0.01, 100.0)
        try:
            base = select_decision(lookahead_all(f, a, table, cfg))
        except NoDecisionError:
            continue
        assert select_decision(lookahead_all(f, a, table.scaled(c), cfg)) == base
        checked += 1
    record_property("detail", f"{checked} scaled selections unchanged")
    assert checked >= 90


def test_criterion_7_w3x_smaller_trees(record_property):
    record_property("criterion", "7. w3x trees smaller than w0x on unsat n=100")
    t = time.perf_counter()
    w3x, w0x = [], []
    seed = 10_000
    while len(w3x) < 40:
        f = generate_uniform_ksat(100, 426, 3, seed)
        seed += 1
        a = dpll(f, HeuristicConfig.named("w3x"))
        if a.sat:
            continue
        b = dpll(f, HeuristicConfig.named("w0x"))
        assert b.status == "unsat"
        w3x.append(a.nodes_expanded)
        w0x.append(b.nodes_expanded)
    wins, losses, p = sign_test(w3x, w0x)
    elapsed = time.perf_counter() - t
    mean3, mean0 = sum(w3x) / len(w3x), sum(w0x) / len(w0x)
    record_property("detail", f"{len(w3x)} unsat, mean nodes w3x {mean3:.1f} vs w0x {mean0:.1f}, "
                              f"sign {wins}/{losses} p={p:.2g}; {elapsed:.0f} s")
    assert mean3 < mean0
    assert p < 0.05
    assert elapsed < 600


def test_criterion_8_strategy_ordering(desk_dataset, record_property):
    record_property("criterion", "8. desk E* ordering ALDS <= ILDS <= DDS <= DFS")
    ds, build_time = desk_dataset
    t = time.perf_counter()
    curves = {k: evaluate(visit_order(k, ds.d), ds) for k in ("alds", "ilds", "dds", "dfs")}
    chain = [("alds", "ilds"), ("ilds", "dds"), ("dds", "dfs")]
    tests = {f"{a}<{b}": sign_test(curves[a].ranks, curves[b].ranks) for a, b in chain}
    elapsed = build_time + time.perf_counter() - t
    record_property("detail", ", ".join(f"{k} {c.e_star:.4f}" for k, c in curves.items()) + "; "
                    + ", ".join(f"{k} {w}/{l} p={p:.2g}" for k, (w, l, p) in tests.items())
                    + f"; {elapsed:.0f} s")
    assert len(ds) == 200
    failures = []
    for a, b in chain:
        if not curves[a].e_star <= curves[b].e_star:
            failures.append(f"mean {a} > {b}")
        if not tests[f"{a}<{b}"][2] < 0.05:
            failures.append(f"sign test {a}<{b} p={tests[f'{a}<{b}'][2]:.3g}")
    assert elapsed < 900
    assert not failures, "; ".join(failures)


def test_criterion_9_greedy(desk_dataset, record_property):
    record_property("criterion", "9. greedy coverage and split-half generalization")
    ds, _ = desk_dataset
    g = greedy_construct(ds)
    remaining = [r.bits for r in ds.records]
    size = 1 << ds.d
    for pick, covered in zip(g.order, g.covered):
        counts = [sum(b >> v & 1 for b in remaining) for v in range(size)]
        assert counts[pick] == covered == max(counts)
        remaining = [b for b in remaining if not b >> pick & 1]
    assert not remaining
    runs = [split_half_eval(ds, seed) for seed in range(10)]
    train_wins = sum(r["greedy_a_on_a"] < r["alds_on_a"] for r in runs)
    test_wins = sum(r["alds_on_b"] < r["greedy_a_on_b"] for r in runs)
    record_property("detail", f"{len(g.covered)} greedy picks; greedy wins on A {train_wins}/10, "
                              f"ALDS wins on B {test_wins}/10")
    assert train_wins == 10
    assert test_wins > 5


def test_criterion_10_persistence(desk_dataset, tmp_path, record_property):
    record_property("criterion", "10. dataset round trip and seed replay")
    ds, _ = desk_dataset
    path = tmp_path / "desk.json"
    ds.save(path)
    loaded = Dataset.load(path)
    assert loaded == ds
    assert loaded.dumps() == path.read_text() == ds.dumps()
    config = config_from_meta(loaded.meta)
    sample = loaded.records[::20]
    for r in sample:
        assert rebuild_record(r, config) == r
    small = build_dataset(12, n=40, ratio=4.26, d=5, seed0=77)
    again = build_dataset(12, n=40, ratio=4.26, d=5, seed0=77)
    assert again.dumps() == small.dumps()
    record_property("detail", f"{len(sample)} desk records and a 12-record dataset rebuilt identically")

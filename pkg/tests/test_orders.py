import pytest
from hypothesis import given
from hypothesis import strategies as st

from lasat.orders import (
    StrategyKind,
    code_bits,
    deepest_discrepancy,
    discrepancies,
    is_permutation,
    ranks,
    visit_order,
)

PERMUTING = [StrategyKind.DFS, StrategyKind.ILDS, StrategyKind.DDS, StrategyKind.ALDS]


def one_based(order):
    return [v + 1 for v in order]


def test_depth_three_orders():
    assert one_based(visit_order("alds", 3)) == [1, 5, 3, 2, 7, 6, 4, 8]
    assert ranks(visit_order("alds", 3)) == [1, 4, 3, 7, 2, 6, 5, 8]
    assert one_based(visit_order("ilds", 3)) == [1, 2, 3, 5, 4, 6, 7, 8]
    assert one_based(visit_order("dds", 3)) == [1, 5, 3, 7, 2, 4, 6, 8]
    assert visit_order("dfs", 3) == list(range(8))


@pytest.mark.parametrize("kind", list(StrategyKind))
def test_depth_one_and_zero(kind):
    order = visit_order(kind, 1)
    if kind is StrategyKind.LDS:
        assert order == [0, 0, 1]
    else:
        assert order == [0, 1]
    assert visit_order(kind, 0) == [0]


def test_depth_guard():
    with pytest.raises(ValueError):
        visit_order("dfs", 25)
    with pytest.raises(ValueError):
        visit_order("alds", -1)
    with pytest.raises(ValueError):
        StrategyKind.parse("bfs")


def test_discrepancies():
    assert discrepancies("000") == 0
    assert discrepancies("101") == 2
    assert discrepancies(0b101) == 2
    for d in range(1, 10):
        assert discrepancies("1" * d) == d


def test_code_bits_msb_first():
    assert code_bits(4, 3) == "100"
    assert code_bits(1, 3) == "001"
    assert code_bits(0, 0) == ""


def test_deepest_discrepancy():
    assert deepest_discrepancy(0, 3) == 0
    assert deepest_discrepancy(0b100, 3) == 1
    assert deepest_discrepancy(0b110, 3) == 2
    assert deepest_discrepancy(0b001, 3) == 3


@pytest.mark.parametrize("d", range(13))
def test_permutations_exhaustive(d):
    for kind in PERMUTING:
        assert is_permutation(visit_order(kind, d), d)


@pytest.mark.parametrize("d", range(13))
def test_alds_two_rule_characterization(d):
    order = visit_order("alds", d)
    for a, b in zip(order, order[1:]):
        ca, cb = discrepancies(a), discrepancies(b)
        assert ca <= cb
        if ca == cb:
            assert a > b


@pytest.mark.parametrize("d", range(9))
def test_lds_repeats(d):
    order = visit_order("lds", d)
    assert set(order) == set(range(1 << d))
    from math import comb
    expected = sum(sum(comb(d, j) for j in range(k + 1)) for k in range(d + 1))
    assert len(order) == expected
    # the last iteration enumerates every leaf in index order
    assert order[-(1 << d):] == list(range(1 << d))


@given(st.integers(0, 10), st.sampled_from(PERMUTING))
def test_ilds_alds_same_iterations(d, kind):
    # every discrepancy-count block holds exactly the same leaves in ILDS and ALDS
    ilds = visit_order("ilds", d)
    alds = visit_order("alds", d)
    key = lambda order: [discrepancies(v) for v in order]
    assert key(ilds) == key(alds)
    assert is_permutation(visit_order(kind, d), d)


def test_ranks_inverse():
    order = visit_order("dds", 6)
    r = ranks(order)
    assert all(order[r[v] - 1] == v for v in range(64))

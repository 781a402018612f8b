import pytest

from dynreserve.auction import (TABLE1, AuctionScenario, check_table1, dominance_check,
                                instantiate, utility, verify_table1)


@pytest.mark.parametrize("v,bid,top,r,expected", [
    (1.0, 1.0, 0.5, 0.2, 0.5),
    (1.0, 0.4, 0.5, 0.0, 0.0),
    (1.0, 2.0, 0.5, 1.5, -0.5),
])
def test_utility(v, bid, top, r, expected):
    assert utility(AuctionScenario(v, bid, top, r)) == pytest.approx(expected)


def test_tie_with_price_loses():
    assert utility(AuctionScenario(1.0, 0.5, 0.5, 0.2)) == 0.0
    assert utility(AuctionScenario(1.0, 0.5, 0.1, 0.5)) == 0.0


def test_scenario_validation():
    with pytest.raises(ValueError):
        AuctionScenario(0.0, 1.0, 1.0, 1.0)


def test_table1_all_rows_match():
    rows = check_table1()
    assert len(rows) == 12 and all(r.ok for r in rows)


@pytest.mark.parametrize("row,expected", [
    (3, (">0", ">0")),
    (7, ("=0", ">0")),
    (6, ("<0", "=0")),
])
def test_table1_named_rows(row, expected):
    assert verify_table1()[row - 1].observed == expected


def test_table1_instantiation_is_strict_and_spaced():
    for _, ordering, _, _ in TABLE1:
        vals = instantiate(ordering)
        seq = [vals[name] for name in ordering]
        assert all(a - b >= 0.1 - 1e-12 for a, b in zip(seq, seq[1:]))
        assert min(seq) > 0


def test_dominance_holds():
    res = dominance_check(20_000, seed=42)
    assert res.passed and res.counterexample is None


def test_identity_deviation_gives_equal_utility():
    s = AuctionScenario(1.3, 1.3, 0.4, 0.9)
    assert utility(s) == utility(AuctionScenario(1.3, s.valuation, 0.4, 0.9))


def test_negative_control_finds_counterexample():
    res = dominance_check(5_000, seed=1, negative_control=True)
    assert res.violations > 0
    assert res.counterexample is not None and res.counterexample_gain > 0


def test_dominance_deterministic():
    a = dominance_check(3_000, seed=7, negative_control=True)
    b = dominance_check(3_000, seed=7, negative_control=True)
    assert a == b

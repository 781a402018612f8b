import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dynreserve.core import DualState, decide
from dynreserve.pricing import clearing_price, reserve_price, reserve_prices
from dynreserve.problem import DomainTrafficRecord, PlatformConstraints, compile_domain

CONS = PlatformConstraints(tctr=0.05, tgpm=40.0, tpv=1.0)


def test_zero_multipliers_give_zero_reserve():
    q = reserve_price(DomainTrafficRecord("a", 1.0, 0.1, 10.0), CONS, DualState([0, 0, 0]))
    assert q.r == 0.0 and q.id == "a"


def test_thresholds_met_exactly():
    rec = DomainTrafficRecord("a", 1.0, 0.05, 40.0)
    assert reserve_price(rec, CONS, DualState([3.0, 2.0, 0.0])).r == 0.0


def test_direct_arithmetic():
    rec = DomainTrafficRecord("a", 1.0, 0.03, 123.0)
    q = reserve_price(rec, CONS, DualState([1.0, 0.0, 0.001]))
    assert q.r == pytest.approx(0.7)


def test_reserve_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        reserve_price(DomainTrafficRecord("a", 1.0, 0.1, 1.0), CONS, DualState([1.0]))


def test_vectorised_matches_scalar_and_clamp():
    rng = np.random.default_rng(0)
    ctr = rng.uniform(0.01, 0.2, 100)
    gpm = rng.uniform(0, 90, 100)
    lam = DualState([2.0, 0.01, 0.02])
    r = reserve_prices(ctr, gpm, CONS, lam)
    scalar = [reserve_price(DomainTrafficRecord(i, 1.0, ctr[i], gpm[i]), CONS, lam).r
              for i in range(100)]
    assert r.tolist() == scalar
    assert (r < 0).any()
    assert (reserve_prices(ctr, gpm, CONS, lam, clamp=True) >= 0).all()


@pytest.mark.parametrize("winner,runner,r,expected", [
    (2.0, 1.0, 0.5, (True, 1.0)),
    (2.0, 1.0, 1.5, (True, 1.5)),
    (2.0, 1.0, 2.0, (False, None)),
    (2.0, 1.0, -3.0, (True, 1.0)),
])
def test_clearing_price(winner, runner, r, expected):
    assert clearing_price(winner, runner, r) == expected


def test_clearing_price_precondition():
    with pytest.raises(ValueError):
        clearing_price(1.0, 2.0, 0.0)


records = st.builds(DomainTrafficRecord, st.just("r"), st.floats(0.01, 20.0),
                    st.floats(1e-3, 1.0), st.floats(0.0, 200.0))
multipliers = st.lists(st.floats(0.0, 50.0), min_size=3, max_size=3)


@settings(max_examples=500, deadline=None)
@given(records, multipliers)
def test_allocation_matches_reserve(rec, lam):
    duals = DualState(lam)
    p = compile_domain([rec], CONS)
    assert decide(p.record(0), duals) == (rec.bid > reserve_price(rec, CONS, duals).r)


@settings(max_examples=200, deadline=None)
@given(records, st.floats(0.01, 20.0), multipliers)
def test_quote_ignores_bid(rec, other_bid, lam):
    other = DomainTrafficRecord(rec.id, other_bid, rec.ctr, rec.gpm)
    duals = DualState(lam)
    assert reserve_price(rec, CONS, duals).r == reserve_price(other, CONS, duals).r


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(-5.0, 15.0))
def test_charge_never_exceeds_winning_bid(a, b, r):
    winner, runner = max(a, b), min(a, b)
    sold, ppc = clearing_price(winner, runner, r)
    if sold:
        assert ppc <= winner

"""Single-slot second-price auction with a reserve, for truthfulness checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class AuctionScenario:
    valuation: float
    own_bid: float
    competitor_top: float
    reserve: float

    def __post_init__(self):
        vals = (self.valuation, self.own_bid, self.competitor_top, self.reserve)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("scenario values must be finite")
        if self.valuation <= 0.0:
            raise ValueError("valuation must be positive")
        if self.own_bid < 0.0 or self.competitor_top < 0.0:
            raise ValueError("bids must be nonnegative")


def utility(s: AuctionScenario) -> float:
    """Quasilinear per-click utility; ties with the price lose."""
    price = max(s.competitor_top, s.reserve)
    if s.own_bid > price:
        return s.valuation - price
    return 0.0


def utilities(valuation, own_bid, competitor_top, reserve) -> np.ndarray:
    price = np.maximum(competitor_top, reserve)
    return np.where(own_bid > price, valuation - price, 0.0)


# (strategy, ordering from largest to smallest, utility sign, optimal utility sign)
TABLE1 = (
    ("overbid", ("bid", "drp", "v", "ppc"), "<0", "=0"),
    ("overbid", ("bid", "drp", "ppc", "v"), "<0", "=0"),
    ("overbid", ("bid", "v", "drp", "ppc"), ">0", ">0"),
    ("overbid", ("bid", "v", "ppc", "drp"), ">0", ">0"),
    ("overbid", ("bid", "ppc", "v", "drp"), "<0", "=0"),
    ("overbid", ("bid", "ppc", "drp", "v"), "<0", "=0"),
    ("underbid", ("v", "drp", "bid", "ppc"), "=0", ">0"),
    ("underbid", ("v", "drp", "ppc", "bid"), "=0", ">0"),
    ("underbid", ("v", "bid", "drp", "ppc"), ">0", ">0"),
    ("underbid", ("v", "bid", "ppc", "drp"), ">0", ">0"),
    ("underbid", ("v", "ppc", "bid", "drp"), "=0", ">0"),
    ("underbid", ("v", "ppc", "drp", "bid"), "=0", ">0"),
)


def _sign(u: float) -> str:
    return ">0" if u > 0.0 else "<0" if u < 0.0 else "=0"


@dataclass(frozen=True)
class Table1Row:
    row: int
    ordering: str
    deviation_utility: float
    truthful_utility: float
    expected: tuple[str, str]
    observed: tuple[str, str]

    @property
    def ok(self) -> bool:
        return self.expected == self.observed


def instantiate(ordering, top: float = 0.4, step: float = 0.1) -> dict:
    """Concrete values for a strict ordering, spaced by ``step``."""
    return {name: top - i * step for i, name in enumerate(ordering)}


def verify_table1() -> list[Table1Row]:
    rows = []
    for i, (_, ordering, dev_sign, opt_sign) in enumerate(TABLE1, start=1):
        v = instantiate(ordering)
        deviate = utility(AuctionScenario(v["v"], v["bid"], v["ppc"], v["drp"]))
        truthful = utility(AuctionScenario(v["v"], v["v"], v["ppc"], v["drp"]))
        rows.append(Table1Row(
            row=i,
            ordering=">".join(ordering),
            deviation_utility=deviate,
            truthful_utility=truthful,
            expected=(dev_sign, opt_sign),
            observed=(_sign(deviate), _sign(truthful)),
        ))
    return rows


@dataclass(frozen=True)
class DominanceResult:
    trials: int
    violations: int
    counterexample: Optional[AuctionScenario]
    counterexample_gain: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def dominance_check(trials: int, seed: int, negative_control: bool = False,
                    eps: float = 1e-3, tol: float = 1e-12, chunk: int = 65536) -> DominanceResult:
    """Sample scenarios and compare truthful bidding against a random deviation.

    Reserves are drawn independently of the agent's bid. With
    ``negative_control`` the reserve tracks the bid (``bid - eps``), which
    breaks truthfulness; the harness should then find violations.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    streams = np.random.SeedSequence(seed).spawn(-(-trials // chunk))
    violations = 0
    first = None
    gain = 0.0
    done = 0
    for ss in streams:
        m = min(chunk, trials - done)
        rng = np.random.default_rng(ss)
        v = rng.uniform(0.01, 2.0, m)
        top = rng.uniform(0.0, 2.0, m)
        dev = rng.uniform(0.0, 3.0, m)
        # a slice of identity deviations
        same = rng.random(m) < 0.05
        dev = np.where(same, v, dev)
        if negative_control:
            r_truth, r_dev = v - eps, dev - eps
        else:
            r_truth = r_dev = rng.uniform(-0.5, 2.0, m)
        u_truth = utilities(v, v, top, r_truth)
        u_dev = utilities(v, dev, top, r_dev)
        bad = np.flatnonzero(u_truth < u_dev - tol)
        if bad.size and first is None:
            j = int(bad[0])
            first = AuctionScenario(float(v[j]), float(dev[j]), float(top[j]), float(r_dev[j]))
            gain = float(u_dev[j] - u_truth[j])
        violations += int(bad.size)
        done += m
    return DominanceResult(trials, violations, first, gain)


def check_table1() -> list[Table1Row]:
    """:func:`verify_table1`, raising on the first row whose signs disagree."""
    rows = verify_table1()
    for row in rows:
        if not row.ok:
            raise AssertionError(f"Table 1 row {row.row} ({row.ordering}): expected "
                                 f"{row.expected}, observed {row.observed}")
    return rows

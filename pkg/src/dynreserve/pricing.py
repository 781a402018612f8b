"""Per-traffic dynamic reserve prices from the solved multipliers."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DualState
from .problem import DomainTrafficRecord, PlatformConstraints


@dataclass(frozen=True)
class ReservePriceQuote:
    id: object
    r: float
    lambda_snapshot: DualState


def _domain_lambdas(duals: DualState):
    if duals.lambdas.shape[0] != 3:
        raise ValueError("reserve prices need the three domain multipliers (ctr, gpm, pv)")
    return duals.lambdas.tolist()


def reserve_price(rec: DomainTrafficRecord, cons: PlatformConstraints,
                  duals: DualState) -> ReservePriceQuote:
    """Cost-per-click floor above which selling this traffic is worth it.

    The bid is not read: the floor depends only on the traffic's predicted
    CTR and GPM and the platform multipliers.
    """
    if not rec.ctr > 0.0:
        raise ValueError(f"record {rec.id!r}: ctr must be positive")
    l_ctr, l_gpm, l_pv = _domain_lambdas(duals)
    r = (l_ctr * (cons.tctr - rec.ctr) + l_gpm * (cons.tgpm - rec.gpm) + l_pv) / rec.ctr
    return ReservePriceQuote(rec.id, r, duals)


def reserve_prices(ctr, gpm, cons: PlatformConstraints, duals: DualState,
                   clamp: bool = False) -> np.ndarray:
    """Vectorised reserve prices; ``clamp`` floors negative quotes at 0 for display."""
    ctr = np.asarray(ctr, dtype=np.float64)
    gpm = np.asarray(gpm, dtype=np.float64)
    if (ctr <= 0.0).any():
        raise ValueError("ctr must be positive")
    l_ctr, l_gpm, l_pv = _domain_lambdas(duals)
    r = (l_ctr * (cons.tctr - ctr) + l_gpm * (cons.tgpm - gpm) + l_pv) / ctr
    return np.maximum(r, 0.0) if clamp else r


def clearing_price(winner_bid: float, runner_up_bid: float,
                   r: float) -> tuple[bool, Optional[float]]:
    """Single-slot second price with a reserve. A bid equal to the reserve does not sell."""
    if winner_bid < runner_up_bid or runner_up_bid < 0.0:
        raise ValueError("need winner_bid >= runner_up_bid >= 0")
    if winner_bid > r:
        return True, max(runner_up_bid, r)
    return False, None

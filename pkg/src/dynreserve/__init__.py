"""Dynamic reserve prices for sponsored-search traffic via Lagrangian relaxation.

Selling decisions under platform-wide CTR, GPM and impression constraints are
made per traffic unit from a handful of multipliers; the same multipliers give
each unit a cost-per-click reserve price.
"""
from .cd2rp import CandidateSet, candidates, dual_binary_search, solve_cd2rp
from .core import (DualState, GapReport, Selection, adjusted_cost, decide, dual_value,
                   duality_gap, evaluate)
from .d3rp import D3rpConfig, dual_update, heuristic_alpha, solve_d3rp
from .parallel import ShardPlan, map_reduce, plan
from .pricing import ReservePriceQuote, clearing_price, reserve_price, reserve_prices
from .problem import (DomainTrafficRecord, GeneralProblem, PlatformConstraints, TrafficRecord,
                      compile_domain, generate_synthetic)
from .kernels import active as active_backend

__version__ = "0.1.0"

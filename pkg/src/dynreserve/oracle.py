"""Exact reference solutions for small instances by full enumeration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DualState, dual_value
from .problem import GeneralProblem

MAX_EXHAUSTIVE_N = 25
_LOW_BITS = 12


@dataclass(frozen=True, eq=False)
class OracleResult:
    opt_value: float
    opt_x: np.ndarray
    feasible_count: int


def _subset_sums(vals: np.ndarray) -> np.ndarray:
    """Sums of ``vals`` rows over all subsets; subset ``m`` takes row ``j`` when
    bit ``(len - 1 - j)`` of ``m`` is set, so the first row is the top bit."""
    k = vals.shape[0]
    out = np.zeros((1 << k, vals.shape[1]))
    for j in range(k):
        bit = 1 << (k - 1 - j)
        idx = np.arange(1 << k)
        has = (idx & bit) != 0
        out[has] += vals[j]
    return out


def exhaustive(problem: GeneralProblem) -> OracleResult:
    """Best feasible assignment among all ``2^N``; ties go to the
    lexicographically smallest ``x`` (False < True, record 0 first)."""
    n = problem.n
    if n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"instance too large for exhaustive oracle (N={n} > {MAX_EXHAUSTIVE_N})")
    # columns: value, then the L constraint totals
    cols = np.column_stack([problem.c, problem.b])
    n_low = min(_LOW_BITS, n)
    n_high = n - n_low
    high = _subset_sums(cols[:n_high])
    low = _subset_sums(cols[n_high:])
    bounds = problem.bounds
    best_val = -np.inf
    best_m = -1
    feasible = 0
    for h in range(high.shape[0]):
        tot = low + high[h]
        ok = (tot[:, 1:] >= bounds).all(axis=1)
        cnt = int(ok.sum())
        if not cnt:
            continue
        feasible += cnt
        vals = np.where(ok, tot[:, 0], -np.inf)
        j = int(np.argmax(vals))  # first maximum = smallest index
        if vals[j] > best_val:
            best_val = float(vals[j])
            best_m = (h << n_low) | j
    if best_m < 0:
        raise ValueError("infeasible instance")
    x = np.array([(best_m >> (n - 1 - i)) & 1 for i in range(n)], dtype=bool)
    return OracleResult(opt_value=best_val, opt_x=x, feasible_count=feasible)


def optimality_ratio(problem: GeneralProblem, algo_value: float,
                     duals: Optional[DualState] = None) -> float:
    """``algo_value / OPT`` when enumeration applies, else ``algo_value / dual bound``.

    The dual bound is at least OPT, so the second form understates the ratio.
    """
    if problem.n <= MAX_EXHAUSTIVE_N:
        return algo_value / exhaustive(problem).opt_value
    if duals is None:
        raise ValueError("multipliers are required for the dual-bound ratio when N > 25")
    return algo_value / dual_value(problem, duals)

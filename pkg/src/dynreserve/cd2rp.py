"""Coordinate descent on the multipliers with an exact per-coordinate search.

For a fixed coordinate ``k`` every record's adjusted cost is linear in
``lambda_k``, so the selection can only change at the records' zero
crossings. Sorting those crossings gives a finite candidate set; the
constraint total is nondecreasing along it, so a binary search finds the
smallest multiplier that satisfies constraint ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .core import DualState, Selection
from .parallel import ShardPlan, map_reduce, plan as make_plan, run_shards
from .problem import GeneralProblem
from .report import SolveReport, finalize

EXACT_MODE_LIMIT = 10_000_000
DEFAULT_SAMPLE_SIZE = 4096


class CoordinateInfeasible(ValueError):
    def __init__(self, k: int):
        super().__init__(f"coordinate infeasible: constraint {k} cannot be met by any candidate")
        self.k = k


@dataclass(frozen=True, eq=False)
class CandidateSet:
    k: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] == 0 or v[0] != 0.0:
            raise ValueError("candidate values must start with 0")
        if not np.isfinite(v).all() or (np.diff(v) <= 0.0).any():
            raise ValueError("candidate values must be finite and strictly ascending")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]


def _sample_sorted(run: np.ndarray, size: int) -> np.ndarray:
    if run.shape[0] <= size:
        return run
    # keep both ends so the largest root stays reachable
    idx = np.unique(np.linspace(0, run.shape[0] - 1, size).round().astype(np.intp))
    return run[idx]


def candidates(problem: GeneralProblem, duals: DualState, k: int,
               shard_plan: Optional[ShardPlan] = None, mode: str = "exact",
               sample_size: int = DEFAULT_SAMPLE_SIZE, workers=None) -> CandidateSet:
    """Sorted positive zero crossings of the adjusted costs in ``lambda_k``, plus 0.

    ``mode="sampled"`` keeps ``sample_size`` evenly spaced order statistics of
    each shard's sorted roots instead of all of them.
    """
    if not 0 <= k < problem.n_constraints:
        raise IndexError(f"constraint index {k} out of range")
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown candidate mode {mode!r}")
    shard_plan = shard_plan or make_plan(problem.n, 1)
    kern = kernels.get()
    roots = np.empty(problem.n, dtype=np.float64)
    lam = duals.lambdas

    def shard(s, start, stop):
        m = kern.roots_range(problem.c, problem.b, lam, k, start, stop, roots)
        run = roots[start:start + m]
        run = run[np.isfinite(run)]
        run.sort()
        if mode == "sampled":
            run = _sample_sorted(run, sample_size)
        return run

    runs = run_shards(shard, shard_plan, workers)
    merged = np.concatenate([np.zeros(1)] + runs)
    # stable sort is a run-aware merge for presorted shards
    merged.sort(kind="stable")
    keep = np.empty(merged.shape[0], dtype=bool)
    keep[0] = True
    np.not_equal(merged[1:], merged[:-1], out=keep[1:])
    return CandidateSet(k, merged[keep])


def dual_binary_search(problem: GeneralProblem, duals: DualState, k: int, cands: CandidateSet,
                       shard_plan: Optional[ShardPlan] = None,
                       workers=None) -> tuple[float, Selection]:
    """Smallest candidate for ``lambda_k`` whose selection satisfies constraint ``k``."""
    shard_plan = shard_plan or make_plan(problem.n, 1)
    values = cands.values
    bound = problem.bounds[k]
    seen = {}

    def probe(p):
        if p not in seen:
            seen[p] = map_reduce(problem, duals.replace(k, float(values[p])), shard_plan, workers)
        return seen[p]

    lo, hi = 0, values.shape[0] - 1
    while lo < hi:
        p = (lo + hi) // 2
        if probe(p).cons[k] < bound:
            lo = p + 1
        else:
            hi = p
    sel = probe(hi)
    if sel.cons[k] < bound:
        raise CoordinateInfeasible(k)
    return float(values[hi]), sel


def linear_scan(problem: GeneralProblem, duals: DualState, k: int,
                cands: CandidateSet) -> tuple[float, Selection]:
    """Reference for :func:`dual_binary_search`: first feasible candidate in order."""
    from .core import evaluate

    for v in cands.values:
        sel = evaluate(problem, duals.replace(k, float(v)))
        if sel.cons[k] >= problem.bounds[k]:
            return float(v), sel
    raise CoordinateInfeasible(k)


def solve_cd2rp(problem: GeneralProblem, max_sweeps: int = 15, tol: float = 0.0,
                shard_plan: Optional[ShardPlan] = None, candidate_mode: Optional[str] = None,
                sample_size: int = DEFAULT_SAMPLE_SIZE,
                workers=None, early_stop: bool = True) -> tuple[DualState, Selection, SolveReport]:
    """Sweep the coordinates in ascending order until a sweep moves no multiplier by more than ``tol``."""
    if max_sweeps < 0:
        raise ValueError(f"max_sweeps must be >= 0, got {max_sweeps}")
    shard_plan = shard_plan or make_plan(problem.n, 1)
    if candidate_mode is None:
        candidate_mode = "exact" if problem.n <= EXACT_MODE_LIMIT else "sampled"
    report = SolveReport(algo="cd2rp", shard_count=shard_plan.shard_count,
                         backend=kernels.active(),
                         config={"max_sweeps": max_sweeps, "tol": tol,
                                 "candidate_mode": candidate_mode, "sample_size": sample_size})
    duals = DualState.zeros(problem.n_constraints)
    sel = None
    with report.timed("total"):
        for sweep in range(1, max_sweeps + 1):
            start = duals.lambdas.copy()
            for k in range(problem.n_constraints):
                with report.timed("candidates"):
                    cands = candidates(problem, duals, k, shard_plan, candidate_mode,
                                       sample_size, workers)
                with report.timed("search"):
                    lam_k, sel = dual_binary_search(problem, duals, k, cands, shard_plan, workers)
                duals = DualState(duals.replace(k, lam_k).lambdas, sweep)
            report.iterations = sweep
            report.observe(problem, duals, sel, sweep)
            if float(np.max(np.abs(duals.lambdas - start))) <= tol:
                report.converged = True
                if early_stop:
                    break
        if sel is None:
            sel = map_reduce(problem, duals, shard_plan, workers)
        finalize(report, problem, duals, sel)
    return duals, sel, report

"""Projected dual descent on the multipliers with a fixed learning rate."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .core import DualState, Selection
from .parallel import ShardPlan, map_reduce, plan as make_plan
from .problem import GeneralProblem
from .report import SolveReport, finalize


@dataclass(frozen=True)
class D3rpConfig:
    alpha: float
    max_iters: int = 100
    # None: 1e-9 * max(1, mean |c|), fixed when the solve starts
    tol: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError(f"alpha must be finite and positive, got {self.alpha}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tol is not None and not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


def default_tol(problem: GeneralProblem) -> float:
    return 1e-9 * max(1.0, float(np.mean(np.abs(problem.c))))


def heuristic_alpha(problem: GeneralProblem) -> float:
    """``1 / (N * mean |b|)``: a full-scale violation moves a multiplier by about one."""
    scale = float(np.mean(np.abs(problem.b)))
    if scale == 0.0:
        return 1.0
    return 1.0 / (problem.n * scale)


def dual_update(duals: DualState, cons, bounds, alpha: float) -> DualState:
    """``lambda_k <- max(lambda_k - alpha (cons_k - B_k), 0)``."""
    cons = np.asarray(cons, dtype=np.float64)
    bounds = np.asarray(bounds, dtype=np.float64)
    if cons.shape != duals.lambdas.shape or bounds.shape != duals.lambdas.shape:
        raise ValueError("dimension mismatch between multipliers, cons and bounds")
    lam = np.maximum(duals.lambdas - alpha * (cons - bounds), 0.0)
    return DualState(lam, duals.iteration + 1)


def solve_d3rp(problem: GeneralProblem, cfg: D3rpConfig, shard_plan: Optional[ShardPlan] = None,
               workers=None, early_stop: bool = True) -> tuple[DualState, Selection, SolveReport]:
    """Run dual descent from zero multipliers.

    Each iteration evaluates the selection at the current multipliers and
    steps along the constraint residual. Stops when no multiplier moves by
    ``tol`` or more (unless ``early_stop`` is off), or after ``max_iters``.
    The report keeps the best feasible iterate; if none was feasible the
    final selection is repaired.
    """
    shard_plan = shard_plan or make_plan(problem.n, 1)
    tol = cfg.tol if cfg.tol is not None else default_tol(problem)
    report = SolveReport(algo="d3rp", shard_count=shard_plan.shard_count,
                         backend=kernels.active(),
                         config={"alpha": cfg.alpha, "max_iters": cfg.max_iters, "tol": tol})
    duals = DualState.zeros(problem.n_constraints)
    with report.timed("total"):
        for t in range(1, cfg.max_iters + 1):
            with report.timed("evaluate"):
                sel = map_reduce(problem, duals, shard_plan, workers)
            report.observe(problem, duals, sel, t)
            new = dual_update(duals, sel.cons, problem.bounds, cfg.alpha)
            report.iterations = t
            moved = float(np.max(np.abs(new.lambdas - duals.lambdas)))
            duals = new
            if moved < tol:
                report.converged = True
                if early_stop:
                    break
        with report.timed("evaluate"):
            final = map_reduce(problem, duals, shard_plan, workers)
        finalize(report, problem, duals, final)
    return duals, final, report

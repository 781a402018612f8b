"""Solve reports: per-iteration traces, timings, and JSON serialisation."""
from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import DualState, Selection, dual_from_selection
from .problem import GeneralProblem


@dataclass
class IterationRecord:
    iteration: int
    dual_value: float
    primal_value: float
    feasible: bool
    # only set for feasible iterates
    relative_gap: Optional[float]
    # best dual bound and best feasible primal seen up to this iteration
    best_relative_gap: Optional[float]
    slack: list
    lambdas: list

    def to_dict(self):
        return {
            "iteration": self.iteration,
            "dual_value": self.dual_value,
            "primal_value": self.primal_value,
            "feasible": self.feasible,
            "relative_gap": self.relative_gap,
            "best_relative_gap": self.best_relative_gap,
            "slack": self.slack,
            "lambdas": self.lambdas,
        }


@dataclass
class SolveReport:
    algo: str
    shard_count: int
    iterations: int = 0
    converged: bool = False
    trace: list = field(default_factory=list)
    timings_ms: dict = field(default_factory=dict)
    feasible: bool = False
    final_feasible: bool = False
    # where the returned feasible solution came from: final | best-iterate | repair | none
    solution_source: str = "none"
    solution: Optional[Selection] = None
    solution_duals: Optional[DualState] = None
    best_dual: float = math.inf
    best_primal: float = -math.inf
    backend: str = ""
    config: dict = field(default_factory=dict)

    def observe(self, problem: GeneralProblem, duals: DualState, sel: Selection, iteration: int):
        """Append a trace row for the selection produced by ``duals``."""
        dual = dual_from_selection(problem, duals, sel)
        self.best_dual = min(self.best_dual, dual)
        rel = None
        if sel.feasible:
            if sel.primal_value > self.best_primal or self.solution is None:
                self.best_primal = max(self.best_primal, sel.primal_value)
                self.solution = sel
                self.solution_duals = duals
            if sel.primal_value > 0.0:
                rel = (dual - sel.primal_value) / sel.primal_value
        best_rel = None
        if self.solution is not None and self.best_primal > 0.0:
            best_rel = (self.best_dual - self.best_primal) / self.best_primal
        self.trace.append(IterationRecord(
            iteration=iteration,
            dual_value=dual,
            primal_value=sel.primal_value,
            feasible=sel.feasible,
            relative_gap=rel,
            best_relative_gap=best_rel,
            slack=(sel.cons - problem.bounds).tolist(),
            lambdas=duals.lambdas.tolist(),
        ))

    @property
    def relative_gap(self) -> Optional[float]:
        """Gap between the best dual bound and the best feasible primal found."""
        if self.solution is None or self.best_primal <= 0.0:
            return None
        return (self.best_dual - self.best_primal) / self.best_primal

    @contextmanager
    def timed(self, phase: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            ms = (time.perf_counter() - t0) * 1e3
            self.timings_ms[phase] = self.timings_ms.get(phase, 0.0) + ms

    def to_dict(self) -> dict:
        sol = self.solution
        return {
            "algo": self.algo,
            "backend": self.backend,
            "shard_count": self.shard_count,
            "iterations": self.iterations,
            "converged": self.converged,
            "feasible": self.feasible,
            "final_feasible": self.final_feasible,
            "solution_source": self.solution_source,
            "best_dual": _finite_or_none(self.best_dual),
            "best_primal": _finite_or_none(self.best_primal),
            "relative_gap": self.relative_gap,
            "solution": None if sol is None else {
                "primal_value": sol.primal_value,
                "selected": sol.count,
                "cons": sol.cons.tolist(),
                "lambdas": None if self.solution_duals is None
                else self.solution_duals.lambdas.tolist(),
            },
            "timings_ms": dict(self.timings_ms),
            "trace": [r.to_dict() for r in self.trace],
            "config": self.config,
        }


def _finite_or_none(v):
    return float(v) if math.isfinite(v) else None


def _selection_of(problem: GeneralProblem, x: np.ndarray) -> Selection:
    bounds = problem.bounds
    cons = np.array([problem.b[x, k].sum() for k in range(bounds.shape[0])])
    cons.setflags(write=False)
    x.setflags(write=False)
    return Selection(
        x=x,
        primal_value=float(problem.c[x].sum()),
        cons=cons,
        feasible=bool((cons >= bounds).all()),
        positive_value=math.nan,
        count=int(x.sum()),
    )


def _repair_round(problem: GeneralProblem, x: np.ndarray, cons: np.ndarray) -> bool:
    b = problem.b
    bounds = problem.bounds
    violated = cons < bounds
    idx = np.flatnonzero(x)
    help_ = np.zeros(idx.shape[0])
    for k in np.flatnonzero(violated):
        help_ += np.maximum(-b[idx, k], 0.0)
    useful = help_ > 0.0
    idx, help_ = idx[useful], help_[useful]
    if idx.size == 0:
        return False
    idx = idx[np.argsort(problem.c[idx] / help_, kind="stable")]
    # running constraint totals as records are removed in that order
    after = cons[None, :] - np.cumsum(b[idx], axis=0)
    ok = (after[:, violated] >= bounds[violated]).all(axis=1)
    hits = np.flatnonzero(ok)
    cut = int(hits[0]) + 1 if hits.size else idx.shape[0]
    x[idx[:cut]] = False
    return True


def greedy_repair(problem: GeneralProblem, sel: Selection) -> Selection:
    """Deselect records until violated constraints hold.

    Each round drops records that help the currently violated rows, in
    ascending order of value per unit of violation removed. A removal can
    break another row, so rounds repeat while rows are violated. If that
    stalls, the empty selection is returned when it is feasible. The result
    may still be infeasible (then ``feasible`` is False).
    """
    if sel.feasible:
        return sel
    x = np.array(sel.x, dtype=bool)
    cons = np.asarray(sel.cons, dtype=np.float64)
    for _ in range(problem.n):
        if (cons >= problem.bounds).all() or not _repair_round(problem, x, cons):
            break
        cons = np.array([problem.b[x, k].sum() for k in range(problem.n_constraints)])
    out = _selection_of(problem, x)
    if not out.feasible and (problem.bounds <= 0.0).all():
        return _selection_of(problem, np.zeros(problem.n, dtype=bool))
    return out


def finalize(report: SolveReport, problem: GeneralProblem, duals: DualState, final: Selection):
    """Pick the returned feasible solution: final iterate, best iterate, or a repair."""
    report.final_feasible = final.feasible
    if math.isfinite(final.positive_value):
        report.best_dual = min(report.best_dual, dual_from_selection(problem, duals, final))
    if final.feasible and (report.solution is None
                           or final.primal_value >= report.solution.primal_value):
        report.solution = final
        report.solution_duals = duals
        report.best_primal = max(report.best_primal, final.primal_value)
        report.solution_source = "final"
    elif report.solution is not None:
        report.solution_source = "best-iterate"
    else:
        repaired = greedy_repair(problem, final)
        if repaired.feasible:
            report.solution = repaired
            report.solution_duals = duals
            report.best_primal = repaired.primal_value
            report.solution_source = "repair"
    report.feasible = report.solution is not None

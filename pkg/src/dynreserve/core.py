"""Lagrangian kernel: adjusted costs, the selection rule, dual values and gaps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .problem import GeneralProblem, TrafficRecord


@dataclass(frozen=True, eq=False)
class DualState:
    """Nonnegative multipliers, one per constraint, and the iteration that produced them."""

    lambdas: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=np.float64, copy=True).reshape(-1)
        if not np.isfinite(lam).all():
            raise ValueError("multipliers must be finite")
        if (lam < 0.0).any():
            raise ValueError(f"multipliers must be nonnegative, got {lam.tolist()}")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def zeros(cls, n_constraints: int) -> "DualState":
        return cls(np.zeros(n_constraints))

    def replace(self, k: int, value: float) -> "DualState":
        lam = self.lambdas.copy()
        lam[k] = value
        return DualState(lam, self.iteration)

    def __eq__(self, other):
        if not isinstance(other, DualState):
            return NotImplemented
        return self.iteration == other.iteration and np.array_equal(self.lambdas, other.lambdas)

    def __repr__(self):
        return f"DualState(lambdas={self.lambdas.tolist()}, iteration={self.iteration})"


@dataclass(frozen=True, eq=False)
class Selection:
    """Decisions at one multiplier vector plus the accumulated sums.

    ``positive_value`` is the sum of positive adjusted costs, the first term of
    the dual function, gathered in the same pass.
    """

    x: np.ndarray
    primal_value: float
    cons: np.ndarray
    feasible: bool
    positive_value: float = math.nan
    count: int = 0


@dataclass(frozen=True)
class GapReport:
    dual_value: float
    primal_value: float
    gap: float
    relative_gap: float


def _check_dims(n_coef: int, duals: DualState):
    if n_coef != duals.lambdas.shape[0]:
        raise ValueError(f"dimension mismatch: {n_coef} coefficients vs "
                         f"{duals.lambdas.shape[0]} multipliers")


def adjusted_cost(rec: TrafficRecord, duals: DualState) -> float:
    """``c + sum_k lambda_k b_k``, summed in constraint order."""
    _check_dims(len(rec.b), duals)
    adj = float(rec.c)
    for lam, bk in zip(duals.lambdas.tolist(), rec.b):
        adj = adj + lam * bk
    return adj


def decide(rec: TrafficRecord, duals: DualState) -> bool:
    # a zero adjusted cost is not selected
    return adjusted_cost(rec, duals) > 0.0


def is_feasible(cons, bounds) -> bool:
    return bool((np.asarray(cons) >= np.asarray(bounds)).all())


def selection_from_partials(problem: GeneralProblem, x: np.ndarray, acc: np.ndarray) -> Selection:
    cons = np.array(acc[3:], dtype=np.float64)
    cons.setflags(write=False)
    x = x.view(np.bool_)
    x.setflags(write=False)
    return Selection(
        x=x,
        primal_value=float(acc[0]),
        cons=cons,
        feasible=is_feasible(cons, problem.bounds),
        positive_value=float(acc[1]),
        count=int(acc[2]),
    )


def evaluate(problem: GeneralProblem, duals: DualState) -> Selection:
    """Serial evaluation of the selection rule over every record."""
    _check_dims(problem.n_constraints, duals)
    L = problem.n_constraints
    x = np.empty(problem.n, dtype=np.uint8)
    acc = np.empty(3 + L, dtype=np.float64)
    kernels.get().evaluate_range(problem.c, problem.b, duals.lambdas, 0, problem.n, x, acc)
    return selection_from_partials(problem, x, acc)


def dual_from_selection(problem: GeneralProblem, duals: DualState, sel: Selection) -> float:
    return sel.positive_value - float(np.dot(duals.lambdas, problem.bounds))


def dual_value(problem: GeneralProblem, duals: DualState) -> float:
    """Lagrangian dual ``sum_i max(0, adjusted_i) - sum_k lambda_k B_k``."""
    return dual_from_selection(problem, duals, evaluate(problem, duals))


def duality_gap(problem: GeneralProblem, duals: DualState, sel: Selection) -> GapReport:
    if not sel.feasible:
        raise ValueError("gap undefined for infeasible primal")
    dual = dual_value(problem, duals)
    return gap_report(dual, sel.primal_value)


def gap_report(dual: float, primal: float) -> GapReport:
    gap = dual - primal
    rel = gap / primal if primal > 0.0 else math.nan
    return GapReport(dual_value=dual, primal_value=primal, gap=gap, relative_gap=rel)

import numpy as np
import pytest

from dynreserve.cd2rp import (CandidateSet, CoordinateInfeasible, candidates,
                              dual_binary_search, linear_scan, solve_cd2rp)
from dynreserve.core import DualState, evaluate
from dynreserve.oracle import exhaustive
from dynreserve.parallel import plan
from dynreserve.problem import GeneralProblem, generate_synthetic

from conftest import random_problem


def test_candidates_linear_roots(backend, two_records):
    cs = candidates(two_records, DualState([0.0]), 0)
    assert cs.values.tolist() == [0.0, 0.6, 1.0]


def test_candidates_skip_zero_coefficients_and_negative_roots(backend):
    # record 0: b=0 has no root; record 1: root -0.4 is dropped; record 2: root 2
    p = GeneralProblem(c=[1.0, -0.4, 1.0], b=[[0.0], [-1.0], [-0.5]], bounds=[-10.0])
    assert candidates(p, DualState([0.0]), 0).values.tolist() == [0.0, 2.0]


def test_candidates_use_other_multipliers(backend):
    p = GeneralProblem(c=[1.0], b=[[-1.0, -2.0]], bounds=[-1.0, -1.0])
    # root in lambda_0 is -(1 - 0.25 * 2) / -1 = 0.5
    assert candidates(p, DualState([0.0, 0.25]), 0).values.tolist() == [0.0, 0.5]


def test_candidates_deduplicate_exact_ties(backend):
    p = GeneralProblem(c=[1.0, 1.0, 2.0], b=[[-1.0], [-1.0], [-2.0]], bounds=[-1.0])
    assert candidates(p, DualState([0.0]), 0).values.tolist() == [0.0, 1.0]


def test_candidates_shard_independent(backend):
    p = generate_synthetic(30_000, 3, seed=3, kind="pack")
    lam = DualState([0.2, 0.4, 0.0])
    ref = candidates(p, lam, 2)
    for shards in (2, 5, 8):
        assert np.array_equal(candidates(p, lam, 2, plan(p.n, shards)).values, ref.values)


def test_sampled_candidates_keep_extremes(backend):
    p = generate_synthetic(30_000, 2, seed=3, kind="pack")
    lam = DualState([0.0, 0.0])
    exact = candidates(p, lam, 0, plan(p.n, 4))
    sampled = candidates(p, lam, 0, plan(p.n, 4), mode="sampled", sample_size=64)
    assert len(sampled) <= 4 * 64 + 1
    assert sampled.values[-1] == exact.values[-1]
    assert np.isin(sampled.values, exact.values).all()


def test_candidate_set_invariants():
    with pytest.raises(ValueError):
        CandidateSet(0, [0.5, 1.0])
    with pytest.raises(ValueError):
        CandidateSet(0, [0.0, 1.0, 1.0])


def test_dbs_two_records(backend, two_records):
    lam = DualState([0.0])
    cs = candidates(two_records, lam, 0)
    value, sel = dual_binary_search(two_records, lam, 0, cs)
    assert value == 0.6
    assert sel.x.tolist() == [True, False]
    assert (value, sel.x.tolist()) == (linear_scan(two_records, lam, 0, cs)[0], [True, False])


def test_dbs_returns_zero_when_already_satisfied(backend):
    p = generate_synthetic(1000, 2, seed=0)
    lam = DualState([0.0, 0.0])
    value, _ = dual_binary_search(p, lam, 1, candidates(p, lam, 1))
    assert value == 0.0


def test_dbs_unreachable_bound(backend):
    p = GeneralProblem(c=[1.0, 1.0], b=[[1.0], [0.5]], bounds=[2.0])
    lam = DualState([0.0])
    with pytest.raises(CoordinateInfeasible, match="constraint 0"):
        dual_binary_search(p, lam, 0, candidates(p, lam, 0))


def test_dbs_matches_linear_scan_and_is_minimal(backend):
    rng = np.random.default_rng(5)
    for _ in range(40):
        p = random_problem(rng, int(rng.integers(2, 200)), int(rng.integers(1, 4)))
        lam = DualState(rng.uniform(0.0, 1.0, p.n_constraints))
        k = int(rng.integers(p.n_constraints))
        cs = candidates(p, lam, k, plan(p.n, 3))
        value, sel = dual_binary_search(p, lam, k, cs, plan(p.n, 3))
        ref_value, ref_sel = linear_scan(p, lam, k, cs)
        assert value == ref_value
        assert np.array_equal(sel.x, ref_sel.x)
        assert sel.cons[k] >= p.bounds[k]
        i = int(np.searchsorted(cs.values, value))
        if i > 0:
            below = evaluate(p, lam.replace(k, float(cs.values[i - 1])))
            assert below.cons[k] < p.bounds[k]


def test_solve_two_records_matches_oracle(backend, two_records):
    duals, sel, rep = solve_cd2rp(two_records, max_sweeps=10)
    assert duals.lambdas.tolist() == [0.6]
    assert rep.solution.primal_value == exhaustive(two_records).opt_value
    assert rep.converged and rep.iterations == 2


def test_solve_feasible_at_zero_single_sweep(backend):
    p = generate_synthetic(3000, 3, seed=2)
    duals, sel, rep = solve_cd2rp(p, max_sweeps=10)
    assert rep.iterations == 1 and rep.converged
    assert duals.lambdas.tolist() == [0.0, 0.0, 0.0]


def test_solve_shard_independent(backend):
    p = generate_synthetic(20_000, 3, seed=6, kind="pack")
    ref, _, _ = solve_cd2rp(p, 5, shard_plan=plan(p.n, 1))
    for shards in (2, 8):
        d, _, _ = solve_cd2rp(p, 5, shard_plan=plan(p.n, shards))
        assert d.lambdas.tolist() == ref.lambdas.tolist()


def test_converged_sweep_is_feasible(backend):
    rng = np.random.default_rng(12)
    for _ in range(10):
        p = random_problem(rng, 300, 3, "domain")
        _, sel, rep = solve_cd2rp(p, max_sweeps=200)
        if rep.converged:
            assert sel.feasible


def test_cons_monotone_along_lambda_sweep(backend):
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = random_problem(rng, 500, 3)
        base = rng.uniform(0.0, 1.0, 3)
        for k in range(3):
            grid = np.linspace(0.0, 3.0, 100)
            vals = [evaluate(p, DualState(np.where(np.arange(3) == k, g, base))).cons[k]
                    for g in grid]
            tol = 1e-12 * np.abs(p.b[:, k]).sum()
            assert all(b >= a - tol for a, b in zip(vals, vals[1:]))


def test_candidate_root_deselects_its_record(backend):
    # -c/b rounds to a value where c + r*b is still 1.1e-16 > 0
    c, w = 0.8158535541215322, -0.002738500170148095
    assert c + (-c / w) * w > 0.0
    p = GeneralProblem(c=[c], b=[[w]], bounds=[0.0])
    cs = candidates(p, DualState([0.0]), 0)
    top = cs.values[-1]
    assert top == np.nextafter(-c / w, np.inf)
    assert not evaluate(p, DualState([top])).x[0]
    value, sel = dual_binary_search(p, DualState([0.0]), 0, cs)
    assert value == top and sel.feasible

import numpy as np
import pytest

from dynreserve.problem import (DOMAIN, DomainTrafficRecord, GeneralProblem, PlatformConstraints,
                                TrafficRecord, compile_domain, generate_synthetic)


def test_compile_domain_substitution():
    rec = DomainTrafficRecord("a", bid=2.0, ctr=0.1, gpm=50.0)
    with pytest.warns(UserWarning, match="vacuous"):
        p = compile_domain([rec], PlatformConstraints(tctr=0.05, tgpm=40.0, tpv=100.0))
    assert p.mode == DOMAIN
    assert p.c[0] == pytest.approx(0.2)
    np.testing.assert_allclose(p.b[0], [0.05, 10.0, -1.0])
    np.testing.assert_array_equal(p.bounds, [0.0, 0.0, -100.0])


def test_compile_threshold_matching_record_has_zero_slack():
    rec = DomainTrafficRecord("a", bid=1.0, ctr=0.07, gpm=33.0)
    p = compile_domain([rec], PlatformConstraints(tctr=0.07, tgpm=33.0, tpv=1.0))
    np.testing.assert_array_equal(p.b[0], [0.0, 0.0, -1.0])


def test_compile_rejects_zero_ctr():
    with pytest.raises(ValueError, match="ctr"):
        DomainTrafficRecord("z", bid=1.0, ctr=0.0, gpm=1.0)
    from dynreserve.problem import compile_domain_arrays
    with pytest.raises(ValueError, match="'r2'"):
        compile_domain_arrays([1.0, 1.0], [0.1, 0.0], [1.0, 1.0],
                              PlatformConstraints(0.0, 0.0, 1.0), ids=["r1", "r2"])


def test_compile_empty():
    with pytest.raises(ValueError, match="empty problem"):
        compile_domain([], PlatformConstraints(0.0, 0.0, 1.0))


def test_compile_preserves_n_and_zero_selection_is_feasible():
    rng = np.random.default_rng(3)
    recs = [DomainTrafficRecord(i, rng.uniform(0.1, 3), rng.uniform(0.001, 0.3), rng.uniform(0, 90))
            for i in range(50)]
    p = compile_domain(recs, PlatformConstraints(0.05, 40.0, 10.0))
    assert p.n == 50 and p.n_constraints == 3
    assert (np.zeros(3) >= p.bounds).all()
    assert list(p.ids) == list(range(50))


def test_tpv_above_n_is_flagged():
    with pytest.warns(UserWarning, match="vacuous"):
        compile_domain([DomainTrafficRecord(0, 1.0, 0.1, 1.0)], PlatformConstraints(0, 0, 5))


def test_synthetic_feasible_by_summing_coefficients():
    p = generate_synthetic(1000, 3, seed=7, bound_fractions=(0.1, 0.1, 0.1))
    assert (p.b.sum(axis=0) >= p.bounds).all()
    np.testing.assert_array_equal(p.bounds, [100.0, 100.0, 100.0])
    assert ((p.c >= 0) & (p.c <= 1)).all()


def test_synthetic_is_deterministic():
    a = generate_synthetic(500, 4, seed=11)
    b = generate_synthetic(500, 4, seed=11)
    assert a.c.tobytes() == b.c.tobytes()
    assert a.b.tobytes() == b.b.tobytes()
    assert a.bounds.tobytes() == b.bounds.tobytes()


def test_synthetic_pack_negates_rows():
    p = generate_synthetic(200, 2, seed=1, bound_fractions=(0.2, 0.3), kind="pack")
    assert (p.b <= 0).all()
    np.testing.assert_allclose(p.bounds, [-40.0, -60.0])


@pytest.mark.parametrize("n,l", [(0, 3), (10, 0)])
def test_synthetic_rejects_empty(n, l):
    with pytest.raises(ValueError):
        generate_synthetic(n, l, seed=0)


def test_synthetic_infeasible_fraction():
    # one record can never reach 0.99 * 1 unless its weight exceeds 0.99
    with pytest.raises(ValueError, match="infeasible synthetic instance"):
        for seed in range(50):
            generate_synthetic(1, 1, seed=seed, bound_fractions=(0.99,))


def test_general_problem_validation():
    with pytest.raises(ValueError, match="shape"):
        GeneralProblem(c=[1.0, 2.0], b=[[1.0, 2.0]], bounds=[0.0])
    with pytest.raises(ValueError, match="empty"):
        GeneralProblem(c=[], b=np.zeros((0, 1)), bounds=[0.0])
    p = GeneralProblem(c=[1.0], b=[[2.0]], bounds=[0.0])
    with pytest.raises(ValueError):
        p.c[0] = 3.0
    assert p.record(0) == TrafficRecord(0, 1.0, (2.0,))


def test_from_records_round_trip():
    recs = [TrafficRecord("a", 1.0, (0.5, -1.0)), TrafficRecord("b", 0.25, (0.0, -1.0))]
    p = GeneralProblem.from_records(recs, bounds=[0.0, -1.0])
    assert list(p.records) == recs
    with pytest.raises(ValueError, match="coefficients"):
        GeneralProblem.from_records(recs, bounds=[0.0])


def test_soft_cap_on_constraint_count():
    with pytest.warns(UserWarning, match="soft cap"):
        GeneralProblem(c=[1.0], b=np.zeros((1, 21)), bounds=np.zeros(21))

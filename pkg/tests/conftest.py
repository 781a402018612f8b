import numpy as np
import pytest

from dynreserve import kernels
from dynreserve.problem import GeneralProblem, PlatformConstraints, compile_domain_arrays


@pytest.fixture(params=kernels.available())
def backend(request):
    """Run the test once per importable kernel backend."""
    with kernels.using(request.param):
        yield request.param


@pytest.fixture
def two_records():
    # c=(1.0, 0.6), one cap constraint: select at most one record
    return GeneralProblem(c=[1.0, 0.6], b=[[-1.0], [-1.0]], bounds=[-1.0])


def random_problem(rng, n, l, kind=None):
    """Random instance of one of the feasible-by-construction families."""
    kind = kind or rng.choice(["pack", "domain", "mixed"])
    if kind == "pack":
        w = rng.uniform(0.0, 1.0, size=(n, l))
        cap = rng.uniform(0.1, 0.6, size=l) * w.sum(axis=0)
        return GeneralProblem(c=rng.uniform(0.0, 1.0, n), b=-w, bounds=-cap)
    if kind == "domain":
        bid = rng.lognormal(0.0, 0.5, n)
        ctr = rng.uniform(0.01, 0.2, n)
        gpm = rng.gamma(2.0, 20.0, n)
        cons = PlatformConstraints(tctr=float(rng.uniform(0.05, 0.12)),
                                   tgpm=float(rng.uniform(20.0, 60.0)),
                                   tpv=float(max(1, int(rng.uniform(0.2, 0.8) * n))))
        return compile_domain_arrays(bid, ctr, gpm, cons)
    # mixed-sign rows with a bound that the empty selection meets
    b = rng.normal(0.0, 1.0, size=(n, l))
    bounds = -rng.uniform(0.0, 0.3, size=l) * np.abs(b).sum(axis=0)
    return GeneralProblem(c=rng.uniform(0.0, 1.0, n), b=b, bounds=bounds)


# acceptance criteria: one PASS/FAIL line each in the terminal summary
_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = dict(item.user_properties).get("detail", "")
        _criteria[mark.args[0]] = (mark.args[1], rep.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcome, detail = _criteria[number]
        status = {"passed": "PASS", "failed": "FAIL"}.get(outcome, outcome.upper())
        line = f"[{status}] {number:>2} {title}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)

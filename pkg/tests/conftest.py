import numpy as np
import pytest

from epinetctl import EpidemicParams, Network

_criteria = {}


@pytest.fixture
def cross2():
    """Two nodes influencing each other with unit weight, no self-loops."""
    return Network([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def endemic2(cross2):
    return cross2, EpidemicParams.broadcast(2, 1.0, 0.5, 2.0)


def random_instance(rng, n, beta=(0.1, 1.0), gamma=(0.0, 1.0), cap=(1.1, 4.0), density=0.3):
    """Random irreducible network (ring plus random extra edges) and parameters."""
    w = np.where(rng.random((n, n)) < density, rng.uniform(0.01, 1.0, (n, n)), 0.0)
    if n > 1:
        idx = np.arange(n)
        w[idx, (idx + 1) % n] = rng.uniform(0.05, 1.0, n)
    else:
        w[0, 0] = rng.uniform(0.1, 1.0)
    params = EpidemicParams(rng.uniform(*beta, n), rng.uniform(*gamma, n), rng.uniform(*cap, n))
    return Network(w), params


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for mark in getattr(report, "criterion_marks", ()):
        _criteria.setdefault(mark, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    report.criterion_marks = [m.args[0] for m in item.iter_markers("criterion")]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        outcomes = _criteria[key]
        verdict = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {key}: {verdict} ({len(outcomes)} checks)")

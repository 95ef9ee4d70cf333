import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_crvs(rng, m, k, floor=0.0):
    """``m`` random k-CRVs, each coordinate at least ``floor``."""
    base = rng.dirichlet(np.ones(k), size=m)
    return floor + (1 - k * floor) * base


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the verdict comes from the test outcome."""
    entry = ACCEPTANCE.setdefault(request.node.nodeid, {"id": None, "detail": "", "outcome": "failed"})

    def record(cid, detail=""):
        entry["id"] = cid
        entry["detail"] = detail

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.nodeid in ACCEPTANCE:
        ACCEPTANCE[item.nodeid]["outcome"] = rep.outcome


def pytest_terminal_summary(terminalreporter):
    entries = [e for e in ACCEPTANCE.values() if e["id"] is not None]
    if not entries:
        return
    terminalreporter.section("acceptance criteria")
    for entry in sorted(entries, key=lambda e: e["id"]):
        verdict = "PASS" if entry["outcome"] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {entry['id']:>2}: {verdict}  {entry['detail']}")

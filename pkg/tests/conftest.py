import numpy as np
import pytest

from rejectlab import _kernels_py, kernels

_criteria = {}


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        mark = _criteria.get(report.nodeid)
        if mark is not None:
            mark["outcome"] = report.outcome


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = {"number": m.args[0], "title": m.args[1], "outcome": None}


def pytest_terminal_summary(terminalreporter):
    ran = [c for c in _criteria.values() if c["outcome"] is not None]
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ran, key=lambda c: c["number"]):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[c["outcome"]]
        detail = f"  ({c['detail']})" if c.get("detail") else ""
        terminalreporter.write_line(f"criterion {c['number']}: {status}  {c['title']}{detail}")


@pytest.fixture
def report(request):
    """Attach a one-line measurement to the acceptance summary of this test."""

    def attach(text: str):
        mark = _criteria.get(request.node.nodeid)
        if mark is not None:
            mark["detail"] = text

    return attach


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BACKENDS = [pytest.param(_kernels_py, id="python")]
if kernels.compiled_available():
    from rejectlab import _kernels

    BACKENDS.append(pytest.param(_kernels, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    monkeypatch.setattr(kernels, "glvq_epoch", request.param.glvq_epoch)
    monkeypatch.setattr(kernels, "rslvq_epoch", request.param.rslvq_epoch)
    return request.param

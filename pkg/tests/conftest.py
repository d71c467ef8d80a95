from __future__ import annotations

from pathlib import Path

import pytest

from helpers import TWO_TRIANGLES, make_net

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden_seed42"


@pytest.fixture
def two_triangles():
    return make_net(TWO_TRIANGLES)


@pytest.fixture
def golden_dir():
    return GOLDEN


_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.failed:
        detail = dict(report.user_properties).get("detail", "")
        _CRITERIA[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        status, detail = _CRITERIA[name]
        number = int(name.split("_")[2])
        title = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}: {detail}")

import re

import numpy as np
import pytest

from oracles import H_EX

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, list[tuple[str, str]]] = {}


@pytest.fixture
def h_ex():
    return np.array(H_EX)


@pytest.fixture
def rot30_small():
    c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
    return 0.1 * np.array([[c, -s], [s, c]])


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    m = _CRITERION.search(report.nodeid)
    if m and "test_acceptance" in report.nodeid:
        _results.setdefault(int(m.group(1)), []).append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        outcomes = [o for _, o in _results[num]]
        status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        name = _results[num][0][0].split("::")[-1]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  ({name})")

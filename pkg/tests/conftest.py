import numpy as np
import pytest

from phasetomo import Geometry, forward, shepp_logan


@pytest.fixture(scope="session")
def geom64():
    return Geometry(64, np.arange(0.0, 180.0, 4.0))


@pytest.fixture(scope="session")
def head64():
    return shepp_logan(64)


@pytest.fixture(scope="session")
def sino_head64(geom64, head64):
    return forward(head64, geom64)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One visible pass/fail line per acceptance criterion."""
    lines = []
    for category in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(category, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_c" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            number = name.split("_")[1].lstrip("c")
            verdict = "PASS" if category == "passed" else "FAIL"
            lines.append((int(number), f"criterion {number}: {verdict}  [{name}]"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)

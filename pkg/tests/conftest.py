import numpy as np
import pytest

from starval import make_circle_grid


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def circle64():
    return make_circle_grid(64)


# acceptance summary: one line per criterion at the end of the run
_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record ``(number, title, detail)`` for the acceptance summary."""
    info = {}
    request.node.user_properties.append(("criterion", info))
    return info


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, info in report.user_properties:
        if key == "criterion" and info:
            _ACCEPTANCE.append((info["number"], info["title"], report.passed, info.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d} {title}: {detail}")

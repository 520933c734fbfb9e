import numpy as np
import pytest

from entire_approx.function_space import Domain
from entire_approx.weights import exp_power


@pytest.fixture(scope="session")
def circle():
    return Domain.periodic(1024)


@pytest.fixture(scope="session")
def line():
    """Truncated line with the root-exponential weight exp(|t|^(1/2))."""
    return Domain.line(128.0, 2048, exp_power(0.5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        lines = [v for k, v in report.user_properties if k == "acceptance"]
        name = report.nodeid.split("::")[-1]
        if not lines:
            lines = [f"{name}: did not complete ({report.outcome})"]
        verdict = "PASS" if report.passed else "FAIL"
        _ACCEPTANCE[report.nodeid] = f"{verdict}  {lines[0]}"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE.values():
        terminalreporter.write_line(line)

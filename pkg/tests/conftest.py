import pytest

from k3heights.defaults import default_point, default_surface
from k3heights.wehler import ProjPoint, SurfacePoint

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def surface():
    return default_surface()


@pytest.fixture(scope="session")
def point():
    return default_point()


@pytest.fixture(scope="session")
def old_point():
    # has a torsion fiber direction: sigma_2 of it is exactly periodic
    return SurfacePoint(ProjPoint(1, 0), ProjPoint(-2, 1), ProjPoint(1, 1))


@pytest.fixture
def record_criterion():
    def rec(num: int, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[num] = f"CRITERION {num:2d}: {status} - {detail}"

    return rec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[num])

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sigmalab.geometry import build_icosphere, cylinder_marked_points

settings.register_profile(
    "sigmalab", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("sigmalab")


@pytest.fixture(scope="session")
def ico3():
    return build_icosphere(3)


@pytest.fixture(scope="session")
def cyl3():
    """s=3 icosphere with the cylinder ends z = +1, -1 marked."""
    return build_icosphere(3, cylinder_marked_points())


@pytest.fixture(scope="session")
def cyl4():
    return build_icosphere(4, cylinder_marked_points())


@pytest.fixture(scope="session")
def ico5():
    return build_icosphere(5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def verdict(record_property):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion, then assert it."""

    def check(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}" + (f" [{detail}]" if detail else "")
        record_property("acceptance", line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when != "call":
                continue
            lines += [v for k, v in rep.user_properties if k in ("acceptance", "acceptance-note")]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

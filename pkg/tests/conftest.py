import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gridnav import GridConfig, build_topology, init_state  # noqa: E402
from gridnav.integrator import settle  # noqa: E402

_ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    def record(number, title, passed, detail):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cfg():
    return GridConfig()


@pytest.fixture(scope="session")
def grid():
    return build_topology(30, 30)


@pytest.fixture(scope="session")
def settled(cfg, grid):
    """Default network run to its zero-velocity fixed point."""
    return settle(init_state(cfg), grid, cfg, min_steps=100, tol=1e-12, max_steps=6000)

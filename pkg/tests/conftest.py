import sys

import numpy as np
import pytest

from glv_econ import engine


@pytest.fixture(scope="session")
def small_runs():
    """Reduced-size runs of the four presets, shared across test modules."""
    out = {}
    for name in ("1a", "1b", "1c", "1d"):
        out[name] = engine.run(engine.preset(name, seed=2, n_agents=2000, n_iterations=3000))
    return out


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

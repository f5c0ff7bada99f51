import functools
import sys

import numpy as np
import pytest

from susy_channels.scenario import load_scenario


@functools.lru_cache(maxsize=None)
def preset(name):
    """(scenario, model) for a preset, built once per session."""
    scen = load_scenario(name)
    return scen, scen.model()


@pytest.fixture(scope="session")
def models():
    return lambda name: preset(name)[1]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(k for k in mod.RESULTS if isinstance(k, int)):
        terminalreporter.write_line(mod.RESULTS[key])

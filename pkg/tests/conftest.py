import numpy as np
import pytest

from zohcbf.engine import SupConfig
from zohcbf.systems import make_system

# acceptance-criterion results collected here and printed in the terminal
# summary so every criterion shows one pass/fail line even on success
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def exact_config():
    """Engine settings for tests whose expected values are exact."""
    return SupConfig(budget=512, refine_rounds=4, top_k=8, inflation=1.0, seed=3)


@pytest.fixture(scope="session")
def integrator():
    return make_system("integrator1d")


@pytest.fixture(scope="session")
def double_int():
    return make_system("double-integrator")


@pytest.fixture(scope="session")
def static_sys():
    return make_system("static")


@pytest.fixture(scope="session")
def uni():
    return make_system("unicycle")


@pytest.fixture(scope="session")
def craft():
    return make_system("spacecraft")


@pytest.fixture()
def rng():
    return np.random.default_rng(42)

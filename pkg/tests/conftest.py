import numpy as np
import pytest

from foliage import construct
from foliage.report import RunConfig, run

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def full_report():
    """One default run over every example and suite, shared by the tests that read it."""
    return run(RunConfig(), tables=True)


@pytest.fixture(scope="session")
def examples():
    return {}


@pytest.fixture
def example(examples):
    """Cached gallery constructor: ``example("hopf")``."""
    def get(name):
        if name not in examples:
            examples[name] = construct(name)
        return examples[name]
    return get


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

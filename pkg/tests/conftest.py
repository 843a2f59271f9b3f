import numpy as np
import pytest

from rmg.synthetic import reference_config


@pytest.fixture
def cfg():
    return reference_config(M=2048)


@pytest.fixture
def small_cfg():
    return reference_config(M=64)


def wrap(phi):
    """Independent wrap into (-pi, pi] used as an oracle."""
    phi = np.asarray(phi, dtype=float)
    return phi - 2 * np.pi * np.ceil((phi - np.pi) / (2 * np.pi))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

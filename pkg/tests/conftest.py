import numpy as np
import pytest

from bayesviews import synthetic
from helpers import ACCEPTANCE


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def frame():
    return synthetic.make_frame(260, seed=3)


@pytest.fixture(scope="session")
def frame500():
    return synthetic.make_frame(500, seed=11)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[k]
        tr.write_line(f"[{status}] criterion {k:2d}: {title} -- {detail}")

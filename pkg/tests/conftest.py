import os

import numpy as np
import pytest
from hypothesis import settings

from jewel import sdp

# Reproducible property runs by default; JEWEL_HYPOTHESIS=random explores.
settings.register_profile("repro", derandomize=True)
settings.register_profile("random")
settings.load_profile(os.environ.get("JEWEL_HYPOTHESIS", "repro"))

# Every SDP solved during the session, as (status, gap, primal residual, dual residual).
SOLVES = []
# Acceptance lines, in criterion order.
ACCEPTANCE = {}

_original_solve = sdp.solve


def _recording_solve(problem, options=None):
    sol = _original_solve(problem, options)
    SOLVES.append((sol.status, sol.gap, sol.primal_residual, sol.dual_residual))
    return sol


sdp.solve = _recording_solve


def pytest_collection_modifyitems(config, items):
    # Acceptance runs last so the solver-hygiene criterion sees every solve.
    items.sort(key=lambda item: item.fspath.basename == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, text = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  AC{key:<2} {text}")


@pytest.fixture
def acceptance(capsys):
    def record(number, passed, text):
        ACCEPTANCE[number] = (bool(passed), text)
        with capsys.disabled():
            print(f"\n{'PASS' if passed else 'FAIL'}  AC{number:<2} {text}")
        return passed
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

import pytest

from positivity.model import PriorSpec, SufficientStats, posterior_update
from positivity.synthetic import INDIANA_M, INDIANA_N, INDIANA_X

# criterion number -> (passed, detail); filled in by test_acceptance.py
ACCEPTANCE_RESULTS = {}


@pytest.fixture(scope="session")
def indiana_posterior():
    return posterior_update(PriorSpec(1, 1, 1, 1, r=3), SufficientStats(INDIANA_M, INDIANA_X, INDIANA_N))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, name, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {name}: {detail}")

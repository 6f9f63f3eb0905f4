import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=25, deadline=None)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)



_ACCEPTANCE: list = []


@pytest.fixture(scope="session")
def report():
    """Record a one-line acceptance verdict; lines are printed in the summary."""

    def _report(number: int, label: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE.append((number, label, f"{'PASS' if ok else 'FAIL'}  [{label}] {detail}"))
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)

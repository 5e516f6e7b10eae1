import numpy as np
import pytest

from opinion_env.model_functions import reference_config


@pytest.fixture
def reference():
    """Reference setup with beta unset (0)."""
    return reference_config()


@pytest.fixture
def rng():
    return np.random.default_rng(42)


ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")

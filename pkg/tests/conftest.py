import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("mzlab", max_examples=60, deadline=None)
settings.load_profile("mzlab")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


INF = math.inf


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    """Store one pass/fail line; printed in the terminal summary even under capture."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bci.synth import standard_normal  # noqa: E402


@pytest.fixture
def lognormal_values():
    return __import__("numpy").exp(standard_normal(4096, seed=7))


@pytest.fixture
def near_normal_values():
    z = 10.0 + standard_normal(4096, seed=11)
    return z[z > 0]


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) == "call" and "test_acceptance.py" in rep.nodeid:
                lines.append((rep.nodeid.split("::")[-1], outcome))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(lines):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")

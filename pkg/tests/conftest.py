from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from robustnfv.netmodel import Scenario, builtin_scenario_text, parse_scenario  # noqa: E402


@pytest.fixture(scope="session")
def worked() -> Scenario:
    return parse_scenario(builtin_scenario_text("example.scn"))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

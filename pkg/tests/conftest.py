from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import ndreg

DATA = Path(ndreg.__file__).parent / "data"

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config._acceptance_lines = {}


@pytest.fixture
def acceptance(request):
    """Record one criterion outcome; the lines are printed at the end of the run."""
    lines = request.config._acceptance_lines

    def record(num: int, ok: bool, detail: str) -> bool:
        line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines[num] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])

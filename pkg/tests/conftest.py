from __future__ import annotations

import numpy as np
import pytest

from geostretch import make_constant, make_davis_skodje, make_linear


@pytest.fixture
def ds():
    return make_davis_skodje(3.0)


@pytest.fixture
def linear_diag():
    return make_linear(np.diag([-1.0, -10.0]))


@pytest.fixture
def constant_field():
    return make_constant([2.0, 3.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def ds_points(rng, count, x_range=(0.25, 2.0), y_range=(0.0, 1.0)):
    return np.column_stack([rng.uniform(*x_range, count), rng.uniform(*y_range, count)])


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record and assert one acceptance criterion: ``criterion(passed, detail)``."""
    def check(passed: bool, detail: str):
        line = f"{'PASS' if passed else 'FAIL'} {request.node.name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line
    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from hypnls.grid import ModelParams, make_radial_grid
from hypnls.spectral import get_transform


@pytest.fixture(scope="session")
def p3():
    return ModelParams(d=3, sigma=0.5)


@pytest.fixture(scope="session")
def p2():
    return ModelParams(d=2, sigma=0.5)


@pytest.fixture(scope="session")
def tr3(p3):
    return get_transform(make_radial_grid(p3, 40.0, 1024))


@pytest.fixture(scope="session")
def tr2(p2):
    return get_transform(make_radial_grid(p2, 20.0, 512))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one summary line per acceptance criterion."""

    def log(k: int, ok: bool, detail: str) -> None:
        line = f"CRITERION {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

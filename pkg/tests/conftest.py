import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_mask(rng, shape=(32, 32), density=0.3, min_fg=3):
    while True:
        y = (rng.random(shape) < density).astype(np.float64)
        if min_fg <= y.sum() < y.size:
            return y


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def verdict():
    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE[number] = f"{'PASS' if passed else 'FAIL'}  [{number:2d}] {title}: {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])

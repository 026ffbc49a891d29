import json
from pathlib import Path

import numpy as np
import pytest

from equidist.surface import SurfacePatch
from equidist.torus import builtin_torus

ORACLES = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


@pytest.fixture(scope="session")
def oracle():
    return ORACLES


@pytest.fixture(scope="session")
def torus():
    return builtin_torus()


def patch(*texts, box=(-1.0, 1.0, -1.0, 1.0), name="p"):
    return SurfacePatch.from_strings(name, texts, box)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

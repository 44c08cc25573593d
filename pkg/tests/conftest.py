import numpy as np
import pytest
from hypothesis import settings

from latticega import DATA_DIR, io
from latticega.geo import LandMask

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def land_mask():
    return io.read_polygons(DATA_DIR / "synthetic_land.txt")


@pytest.fixture
def square_mask():
    """10-degree square centred on (0, 0) with vertices every 1 degree."""
    ring = [(-5.0, lon) for lon in range(-5, 5)] + [(lat, 5.0) for lat in range(-5, 5)]
    ring += [(5.0, lon) for lon in range(5, -5, -1)] + [(lat, -5.0) for lat in range(5, -5, -1)]
    return LandMask([[(float(a), float(b)) for a, b in ring]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, repeated in the terminal summary
_ACCEPTANCE: dict[int, str] = {}
N_CRITERIA = 10


@pytest.fixture
def criterion():
    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        terminalreporter.write_line(_ACCEPTANCE.get(n, f"criterion {n:2d}: NOT RUN  (deselected, or errored before its check)"))

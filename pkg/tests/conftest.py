import numpy as np
import pytest

from chpfem.assembly import discretize
from chpfem.mesh import make_rect_mesh, make_segment_mesh


@pytest.fixture
def seg_ops():
    return discretize(make_segment_mesh(0.0, 1.0, 6), 3)


@pytest.fixture
def rect_ops():
    return discretize(make_rect_mesh(2.0, 1.0, 3, 2), 2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None) if mod else None
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])

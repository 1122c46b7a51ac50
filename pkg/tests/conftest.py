import numpy as np
import pytest

from kinlab import _backend
from kinlab.core import SimParams, TorusGrid, VelocityGrid, discrete_maxwellian

BACKENDS = ["python"] + (["cython"] if _backend.compiled_kernels is not None else [])


@pytest.fixture
def vgrid():
    return VelocityGrid(128, 8.0)


@pytest.fixture
def maxw(vgrid):
    return discrete_maxwellian(vgrid)


@pytest.fixture
def small_params():
    return SimParams(alpha=1.0, bigA=2.0, eps=0.25, grid=TorusGrid(32), vgrid=VelocityGrid(32), t_end=0.2)


@pytest.fixture
def rng():
    return np.random.default_rng(20260514)


@pytest.fixture(params=BACKENDS)
def kernels(request, monkeypatch):
    """Run a test once per available kernel backend."""
    import kinlab.asymptotics
    import kinlab.diffusion
    import kinlab.kinetic

    mod = _backend.python_kernels if request.param == "python" else _backend.compiled_kernels
    for m in (kinlab.kinetic, kinlab.diffusion, kinlab.asymptotics):
        monkeypatch.setattr(m, "kernels", mod)
    return mod


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_line(capsys):
    """Record (and print) the one-line verdict of an acceptance criterion."""

    def record(number, passed, summary):
        line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {summary}"
        ACCEPTANCE_LINES[number] = line
        with capsys.disabled():
            print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

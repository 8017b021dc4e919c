import numpy as np
import pytest

from kerrqed import _accel, hilbert

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["numba", "numpy"])
def kernel_backend(request, monkeypatch):
    """Run a test once per kernel backend."""
    if request.param == "numba" and not _accel.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setattr(_accel, "USE_NUMBA", request.param == "numba")
    return request.param


def random_state(rng, n1, n2, max_total=None):
    """Random normalized PureState, optionally confined to m1 + m2 <= max_total."""
    amps = rng.normal(size=(2, n1, n2)) + 1j * rng.normal(size=(2, n1, n2))
    if max_total is not None:
        m1 = np.arange(n1)[:, None]
        m2 = np.arange(n2)[None, :]
        amps = amps * ((m1 + m2) <= max_total)[None]
    return hilbert.PureState.from_amplitudes(amps, (2, n1, n2))


def random_density(rng, dims, rank=None):
    d = int(np.prod(dims))
    rank = rank or d
    x = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    mat = x @ x.conj().T
    return hilbert.DensityMatrix(dims, mat / np.trace(mat).real)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

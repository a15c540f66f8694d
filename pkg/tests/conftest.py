import numpy as np
import pytest

from reebound import states


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


def random_full_rank(rng, dims=(2, 2), floor=0.2):
    """HS-random state mixed with white noise so the smallest eigenvalue is >= floor/n."""
    n = dims[0] * dims[1]
    rho = states.random_state(rng, dims)
    return states.DensityMatrix((1 - floor) * rho.matrix + floor * np.eye(n) / n, dims)


def random_unit(rng, k=3):
    v = rng.standard_normal(k)
    return v / np.linalg.norm(v)


# acceptance verdicts, echoed in the terminal summary so they show without -s
VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)

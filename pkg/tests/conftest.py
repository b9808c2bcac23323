import numpy as np
import pytest

from gentleq.measurements import Measurement


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_hermitian(rng, d):
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (a + a.conj().T) / 2


def random_measurement(rng, d, k):
    """k operators A_y S^(-1/2) with S = sum A_y* A_y, so completeness holds exactly."""
    a = [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)) for _ in range(k)]
    s = sum(x.conj().T @ x for x in a)
    w, v = np.linalg.eigh(s)
    return Measurement([str(i) for i in range(k)], [x @ (v @ np.diag(w**-0.5) @ v.conj().T) for x in a])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(RESULTS, key=lambda l: int(l.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)

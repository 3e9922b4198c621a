import numpy as np
import pytest


def random_design(rng, n, p, complex_=True):
    X = rng.normal(size=(n, p))
    if complex_:
        X = X + 1j * rng.normal(size=(n, p))
    return X / np.linalg.norm(X, axis=0)


def random_vector(rng, n, complex_=True):
    y = rng.normal(size=n)
    if complex_:
        y = y + 1j * rng.normal(size=n)
    return y


def random_unitary(rng, n):
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; the lines are printed in the terminal summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])

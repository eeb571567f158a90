import numpy as np
import pytest

from alcontinuum.grid import LatticeField

# one line per acceptance criterion, filled by tests/test_acceptance.py
CRITERIA: dict = {}


def report_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    CRITERIA[number] = (title, bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {title}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        title, ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")


def naive_dft(values: np.ndarray) -> np.ndarray:
    """``sum_n a_n exp(-i n theta_k)`` over sites ``n = -M/2..M/2-1`` by direct O(M^2) summation."""
    M = values.size
    n = np.arange(M) - M // 2
    theta = 2 * np.pi * np.arange(M) / M
    return np.exp(-1j * np.outer(theta, n)) @ values


def trig_poly(L: float, kmax: int, seed: int):
    """Random trigonometric polynomial on the window [-L, L) with wavenumbers |k| <= kmax."""
    rng = np.random.default_rng(seed)
    k = np.arange(-kmax, kmax + 1)
    c = rng.standard_normal(k.size) + 1j * rng.standard_normal(k.size)

    def f(x):
        return np.exp(1j * np.pi * np.multiply.outer(np.asarray(x, float), k) / L) @ c

    return f, np.pi * kmax / L


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_field(rng, M: int = 64, h: float = 0.1, scale: float = 1.0) -> LatticeField:
    return LatticeField(h, scale * (rng.standard_normal(M) + 1j * rng.standard_normal(M)))

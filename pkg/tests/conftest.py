import json
import pathlib

import numpy as np
import pytest
import scipy.linalg
from hypothesis import HealthCheck, settings

from ssrcphase.fock import schwinger_operators

settings.register_profile(
    "default", deadline=None, max_examples=30,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

# acceptance verdicts, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def golden():
    doc = json.loads((FIXTURES / "golden.json").read_text())
    return doc["values"], doc["tolerance"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_su2(rng, N):
    """exp(i t n.J) with its SO(3) image R, g J_b g^dag = sum_a R_ab J_a."""
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    t = rng.uniform(0, 2 * np.pi)
    J = schwinger_operators(N)
    g = scipy.linalg.expm(1j * t * sum(c * j for c, j in zip(n, J)))
    norm = np.trace(J[2] @ J[2]).real
    R = np.array([[np.trace(J[a] @ g @ J[b] @ g.conj().T).real / norm for b in range(3)]
                  for a in range(3)])
    return g, R


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

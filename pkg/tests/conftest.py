import numpy as np
import pytest

from biphoton.scenarios import ExperimentConfig, make_spectrum


@pytest.fixture
def cfg():
    return ExperimentConfig()


@pytest.fixture
def spectrum(cfg):
    return make_spectrum(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20100101)


def random_density(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_unitary2(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_x_state(rng):
    p = rng.dirichlet(np.ones(4))
    # coherences bounded by the PSD conditions |r14|^2 <= p1 p4, |r23|^2 <= p2 p3
    r14 = np.sqrt(p[0] * p[3]) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    r23 = np.sqrt(p[1] * p[2]) * rng.uniform() * np.exp(2j * np.pi * rng.uniform())
    m = np.diag(p).astype(complex)
    m[0, 3], m[3, 0] = r14, np.conj(r14)
    m[1, 2], m[2, 1] = r23, np.conj(r23)
    return m


# one line per acceptance criterion, printed after the run
ACCEPTANCE = []


def record(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from mems_forge.channel import KrausDecomposition


def random_state(rng, rank=4):
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pure(rng, dim=4):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_unitary(rng, dim=2):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng, n_terms=None):
    """Arbitrary nonnegative weights and Jones matrices; generally not trace preserving."""
    n = n_terms or int(rng.integers(1, 5))
    terms = [(rng.uniform(0.1, 2.0), rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
             for _ in range(n)]
    return KrausDecomposition.from_terms(terms)


def random_tp_kraus(rng, n_terms=None, scale=1.0):
    """Trace-preserving decomposition from a random isometry, times a uniform loss ``scale``."""
    n = n_terms or int(rng.integers(1, 5))
    iso = random_unitary(rng, 2 * n)[:, :2]
    blocks = [iso[2 * a:2 * a + 2] for a in range(n)]
    return KrausDecomposition.from_terms((scale, K) for K in blocks)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)

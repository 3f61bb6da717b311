import numpy as np
import pytest

from diagpde import becalc as bc
from diagpde.linalg import materialization_cap, set_materialization_cap


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _restore_cap():
    cap = materialization_cap()
    yield
    set_materialization_cap(cap)


def rand_matrix(rng, n, hermitian=False):
    m = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    return (m + m.conj().T) / 2 if hermitian else m


def rand_be(rng, n, label="A", alpha=None, hermitian=False):
    return bc.dilation_be(rand_matrix(rng, n, hermitian), alpha, label)


def embed_dense(U, nq, qubits):
    """Reference lift of ``U`` on ``qubits`` (first = most significant) by index arithmetic."""
    k = len(qubits)
    N = 2**nq
    out = np.zeros((N, N), dtype=complex)
    rest = [q for q in range(nq) if q not in qubits]

    def sub(i):
        return sum(((i >> (nq - 1 - q)) & 1) << (k - 1 - t) for t, q in enumerate(qubits))

    def others(i):
        return tuple((i >> (nq - 1 - q)) & 1 for q in rest)

    for i in range(N):
        for j in range(N):
            if others(i) == others(j):
                out[i, j] = U[sub(i), sub(j)]
    return out


_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    """Record one ``PASS``/``FAIL`` line per acceptance criterion."""

    def put(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return put


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diagpde import statevec as sv
from diagpde.linalg import StateVector

from conftest import embed_dense


def haar(rng, n):
    q, r = np.linalg.qr(rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_layout_worked_example():
    # anc(1) | sys(2): |anc=1, sys=2> sits at index 0b110 = 6
    psi = StateVector(np.eye(8)[6], (("anc", 1), ("sys", 2)))
    assert psi.tensor()[1, 2] == 1


def test_zero_phase_diag_is_identity(rng):
    x = rng.normal(size=(3, 8)) + 0j
    assert np.allclose(sv.PhaseDiag(3, np.zeros(8)).apply(x), x)


def test_cyclic_shift_basis_state():
    out = sv.CyclicShift(3, 1).apply(np.eye(8)[[5]])
    assert np.allclose(out, np.eye(8)[[6]])
    assert np.allclose(sv.CyclicShift(3, 1).apply(np.eye(8)[[7]]), np.eye(8)[[0]])


@pytest.mark.parametrize("qubits", [(0,), (5,), (2, 4), (4, 1), (0, 3, 5), (5, 2, 0, 3)])
def test_embed_matches_index_oracle(rng, qubits):
    U = haar(rng, len(qubits))
    node = sv.embed(sv.DenseUnitary(U), 6, qubits)
    assert np.allclose(node.dense(), embed_dense(U, 6, qubits), atol=1e-12)
    assert np.allclose(sv.adjoint(node).dense(), embed_dense(U, 6, qubits).conj().T, atol=1e-12)


def test_random_composed_node_matches_dense_product(rng):
    nq = 6
    ops, dense = [], np.eye(2**nq, dtype=complex)
    for step in range(8):
        k = int(rng.integers(1, 4))
        qubits = tuple(int(q) for q in rng.permutation(nq)[:k])
        U = haar(rng, k)
        ops.append(sv.embed(sv.DenseUnitary(U), nq, qubits))
        dense = embed_dense(U, nq, qubits) @ dense
    ops.append(sv.PhaseDiag(nq, rng.uniform(0, 2 * np.pi, 2**nq)))
    dense = np.diag(ops[-1].phases) @ dense
    ops.append(sv.CyclicShift(nq, 3))
    dense = np.roll(np.eye(2**nq), 3, axis=0) @ dense
    node = sv.compose(*ops)
    assert np.allclose(node.dense(), dense, atol=1e-10)
    psi = rng.normal(size=2**nq) + 1j * rng.normal(size=2**nq)
    psi /= np.linalg.norm(psi)
    out = sv.apply(node, StateVector(psi))
    assert abs(out.norm() - 1) < 1e-12


def test_select_and_controlled_block_structure(rng):
    U0, U2 = haar(rng, 2), haar(rng, 2)
    node = sv.Select(4, (0, 1), (2, 3), ((0, sv.DenseUnitary(U0)), (2, sv.DenseUnitary(U2))))
    expect = np.zeros((16, 16), dtype=complex)
    for v, blk in enumerate((U0, np.eye(4), U2, np.eye(4))):
        expect[4 * v:4 * v + 4, 4 * v:4 * v + 4] = blk
    assert np.allclose(node.dense(), expect)
    c = sv.controlled(sv.DenseUnitary(U0), 3, (0,), (1, 2))
    assert np.allclose(c.dense(), np.block([[np.eye(4), np.zeros((4, 4))], [np.zeros((4, 4)), U0]]))


def test_reflection_permutation_multiplexed():
    r = sv.Reflection(3, (0, 1)).dense()
    proj = np.kron(np.diag([1, 0, 0, 0]), np.eye(2))
    assert np.allclose(r, 2 * proj - np.eye(8))
    perm = np.array([2, 0, 3, 1])
    p = sv.Permutation(2, perm).dense()
    for i in range(4):
        assert p[perm[i], i] == 1
    s = np.array([0.6, -0.2j])
    rr = np.sqrt(1 - np.abs(s) ** 2)
    m = sv.Multiplexed2x2(2, (s, rr, rr, -s.conj())).dense()
    assert np.allclose(m[:2, :2], np.diag(s))
    assert np.allclose(m.conj().T @ m, np.eye(4))


def test_work_qubits_must_return_clean():
    X = sv.DenseUnitary(np.array([[0, 1], [1, 0]]))
    dirty = sv.WorkQubits(sv.embed(X, 2, (0,)), 1)
    with pytest.raises(sv.WorkQubitError):
        dirty.apply(np.eye(2, dtype=complex))
    clean = sv.WorkQubits(sv.compose(sv.embed(X, 2, (0,)), sv.embed(X, 2, (0,))), 1)
    assert np.allclose(clean.dense(), np.eye(2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_linearity(seed, a, b):
    r = np.random.default_rng(seed)
    node = sv.compose(sv.embed(sv.DenseUnitary(haar(r, 2)), 4, (3, 1)), sv.CyclicShift(4, 5),
                      sv.PhaseDiag(4, r.uniform(0, 6, 16)))
    psi, phi = (r.normal(size=(1, 16)) + 1j * r.normal(size=(1, 16)) for _ in range(2))
    lhs = node.apply(a * psi + b * phi)
    rhs = a * node.apply(psi) + b * node.apply(phi)
    assert np.allclose(lhs, rhs, atol=1e-12 * (1 + abs(a) + abs(b)) * 10)


def test_project_zero_ancilla(rng):
    sys = rng.normal(size=4) + 0j
    sys /= np.linalg.norm(sys)
    psi = StateVector(np.kron([1, 0], sys), (("anc", 1), ("sys", 2)))
    out, p = sv.project_zero_ancilla(psi, "anc")
    assert p == pytest.approx(1) and np.allclose(out.amplitudes, sys)
    a = 3
    uni = StateVector(np.kron(np.ones(2**a) / np.sqrt(2**a), sys), (("anc", a), ("sys", 2)))
    assert sv.project_zero_ancilla(uni)[1] == pytest.approx(2.0**-a)
    v = rng.normal(size=32) + 1j * rng.normal(size=32)
    v /= np.linalg.norm(v)
    st_ = StateVector(v, (("x", 1), ("anc", 2), ("y", 2)))
    P = embed_dense(np.diag([1, 0, 0, 0]), 5, (1, 2))
    expect = np.vdot(v, P @ v).real
    out, p = sv.project_zero_ancilla(st_, "anc")
    assert p == pytest.approx(expect, abs=1e-14)
    assert [r[0] for r in out.layout] == ["x", "y"]
    with pytest.raises(sv.ProjectionError):
        sv.project_zero_ancilla(StateVector(np.kron([0, 1], sys), (("anc", 1), ("sys", 2))))


def test_apply_rejects_slice_mismatch():
    with pytest.raises(ValueError, match="slice mismatch"):
        sv.apply(sv.Identity(2), StateVector(np.eye(8)[0]))

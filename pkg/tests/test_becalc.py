from fractions import Fraction

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from diagpde import becalc as bc
from diagpde import statevec as sv
from diagpde.linalg import MaterializationError, set_materialization_cap

from conftest import embed_dense, rand_be, rand_matrix


def ket_bra(i, j, k):
    m = np.zeros((2**k, 2**k))
    m[i, j] = 1
    return m


def frac_be(alpha, a, eps, n=1, label="X"):
    return bc.BlockEncoding(alpha, a, eps, n, sv.Identity(a + n), {label: 1}, 0, label)


# --- metadata rules in exact arithmetic --------------------------------------------

def test_product_metadata_exact():
    A = frac_be(Fraction(3, 2), 1, Fraction(1, 10))
    B = frac_be(Fraction(5, 7), 2, Fraction(1, 3))
    P = bc.product(A, B)
    assert P.triple == (Fraction(15, 14), 3, Fraction(3, 2) * Fraction(1, 3) + Fraction(5, 7) / 10)
    assert P.counters == {"X": 2}


def test_lcu_metadata_exact():
    terms = [frac_be(Fraction(3, 2), 1, Fraction(1, 10)), frac_be(Fraction(1, 2), 3, Fraction(1, 5)),
             frac_be(Fraction(2), 2, Fraction(1, 20))]
    y = [Fraction(1, 3), Fraction(-1, 2), Fraction(1, 4)]
    U = bc.lcu(y, terms)
    norm = Fraction(13, 12)
    assert U.alpha == 2 * norm and U.eps == Fraction(1, 5) * norm
    assert U.ancillas == 3 + 2
    # two terms of selector width 1 -> no and-ladder; four terms -> 2 * 4 * 6
    assert "toffoli" not in bc.lcu(y[:2], terms[:2]).counters
    assert bc.lcu(y + [Fraction(1)], terms + terms[:1]).counters["toffoli"] == 2 * 4 * 6


def test_toffoli_counts_of_selectors(rng):
    U = rand_be(rng, 1, "U", alpha=5.0)
    for k in (1, 2, 3):
        j = 2**k - 1
        assert bc.selector_offdiag(j, U, U, k).counters["toffoli"] == 4 * (4 * k - 2)
        assert bc.selector_diag(j, U, k).counters["toffoli"] == 2 * (4 * k - 2)
        assert bc.selector_offdiag_shared(j, U, k).counters["toffoli"] == 4 * (4 * k - 2)
    assert "toffoli" not in bc.controlled(U, 1).counters
    assert bc.controlled(U, 3).counters["toffoli"] == 2 * 10
    assert bc.controlled(U, 3).counters["ctrl(U)"] == 1


def test_counter_labels():
    assert bc.ctrl_label(bc.ctrl_label("U")) == "ctrl(U)"
    assert bc.adj_label(bc.adj_label("ctrl(U)")) == "ctrl(U)"
    assert bc.adj_label("ctrl(U)") == "ctrl(U^dag)"
    assert bc.adj_label("toffoli") == "toffoli"
    assert [bc.mcx_gates(c) for c in range(5)] == [0, 1, 6, 24, 48]


# --- blocks against dense oracles ---------------------------------------------------

@pytest.mark.parametrize("k,j", [(1, 1), (2, 1), (2, 3), (3, 5)])
def test_selector_offdiag_block(rng, k, j):
    A1, A2 = rand_matrix(rng, 2), rand_matrix(rng, 2)
    alpha = 1.01 * max(np.linalg.norm(A1, 2), np.linalg.norm(A2, 2))
    U1, U2 = bc.dilation_be(A1, alpha, "U1"), bc.dilation_be(A2, alpha, "U2")
    expect = np.kron(ket_bra(0, j, k), A1) + np.kron(ket_bra(j, 0, k), A2)
    for flags in (False, True):
        M = bc.selector_offdiag(j, U1, U2, k, explicit_flags=flags)
        assert bc.verify(M, expect, use_fast=False) < 1e-10
        assert bc.verify(M, expect, use_fast=True) < 1e-10
    with pytest.raises(ValueError):
        bc.selector_offdiag(0, U1, U2, k)
    with pytest.raises(ValueError):
        bc.selector_offdiag(2**k, U1, U2, k)


@pytest.mark.parametrize("k,j", [(1, 0), (2, 2), (3, 7)])
def test_selector_diag_block(rng, k, j):
    A = rand_matrix(rng, 1)
    U = bc.dilation_be(A, None, "U")
    expect = np.kron(ket_bra(j, j, k), A)
    M = bc.selector_diag(j, U, k)
    assert bc.verify(M, expect, use_fast=False) < 1e-10


@pytest.mark.parametrize("phase", [-1, 1j])
def test_selector_shared_block(rng, phase):
    A = rand_matrix(rng, 2)
    U = bc.dilation_be(A, None, "U")
    expect = np.kron(ket_bra(0, 3, 2), A) + phase * np.kron(ket_bra(3, 0, 2), A)
    M = bc.selector_offdiag_shared(3, U, 2, phase)
    assert bc.verify(M, expect, use_fast=False) < 1e-10
    assert bc.verify(M, expect) < 1e-10


def test_lcu_mixed_alphas_block(rng):
    mats = [rand_matrix(rng, 2) for _ in range(3)]
    terms = [bc.dilation_be(m, s * np.linalg.norm(m, 2), f"T{i}")
             for i, (m, s) in enumerate(zip(mats, (1.1, 3.0, 1.7)))]
    terms[1] = bc.product(terms[1], bc.dilation_be(np.eye(4) * 0.5, 1.0, "half"))
    y = [0.7, -1.3j, 0.4 + 0.2j]
    U = bc.lcu(y, terms)
    expect = sum(c * t.reference_matrix() for c, t in zip(y, terms))
    assert bc.verify(U, expect, use_fast=False) < 1e-10
    assert np.allclose(bc.materialize_block(U), bc.materialize_block(U, use_fast=False), atol=1e-12)


def test_product_and_adjoint_blocks(rng):
    A, B = rand_be(rng, 2, "A"), rand_be(rng, 2, "B")
    P = bc.product(A, B)
    dense = A.reference_matrix() @ B.reference_matrix()
    assert bc.verify(P, dense, use_fast=False) < 1e-10
    Pd = bc.adjoint(P)
    assert bc.verify(Pd, dense.conj().T, use_fast=False) < 1e-10
    assert Pd.counters == {"A^dag": 1, "B^dag": 1}


def test_controlled_block(rng):
    A = rand_be(rng, 1, "A")
    C = bc.controlled(A, 2)
    expect = np.kron(np.diag([1, 1, 1, 0]), np.eye(2)) * A.alpha + np.kron(np.diag([0, 0, 0, 1]), A.reference_matrix())
    assert bc.verify(C, expect, use_fast=False) < 1e-10


def test_lift_block(rng):
    A = rand_be(rng, 2, "A")
    L = bc.lift(A, 4, (3, 1))
    expect = embed_dense(A.reference_matrix(), 4, (3, 1))
    assert bc.verify(L, expect, use_fast=False) < 1e-10
    assert bc.verify(L, expect) < 1e-10


@pytest.mark.parametrize("k", [0, 1, 2, 3, 6])
def test_chebyshev_against_eigen_oracle(rng, k):
    H = rand_matrix(rng, 2, hermitian=True)
    U = bc.dilation_be(H, None, "H")
    lam, V = np.linalg.eigh(H / U.alpha)
    oracle = (V * np.cos(k * np.arccos(np.clip(lam, -1, 1)))) @ V.conj().T
    T = bc.chebyshev(U, k)
    assert T.alpha == 1 and T.ancillas == 2
    assert bc.verify(T, oracle, use_fast=False) < 1e-10
    assert T.counters.get("H", 0) == (k + 1) // 2 and T.counters.get("H^dag", 0) == k // 2


def test_chebyshev_rejects_non_hermitian(rng):
    with pytest.raises(ValueError, match="Hermitian"):
        bc.chebyshev(rand_be(rng, 1), 2)


def test_dilation_rejects_small_alpha_and_nan(rng):
    A = rand_matrix(rng, 1)
    with pytest.raises(ValueError):
        bc.dilation_be(A, 0.5 * np.linalg.norm(A, 2))
    with pytest.raises(ValueError, match="non-finite"):
        bc.dilation_be(np.array([[np.nan, 0], [0, 1]]))


def test_actions_are_unitary(rng):
    A = rand_be(rng, 1, "A")
    U = bc.lcu([1.0, -0.5, 0.25j], [A, A, A])
    for enc in (U, bc.selector_offdiag(1, A, A, 1), bc.chebyshev(bc.dilation_be(np.diag([0.3, -0.9])), 3)):
        u = bc.materialize_unitary(enc)
        assert np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10)


def test_materialization_cap_guards_block(rng):
    A = rand_be(rng, 3)
    set_materialization_cap(4)
    with pytest.raises(MaterializationError):
        bc.materialize_block(A)


def test_verify_detects_corrupted_alpha(rng):
    A = rand_be(rng, 2)
    bad = A.replace(alpha=A.alpha * 1.1)
    assert bc.verify_ok(A)
    assert not bc.verify_ok(bad, A.reference_matrix())


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 5))
def test_lcu_block_is_weighted_sum(seed, m):
    r = np.random.default_rng(seed)
    terms = [bc.dilation_be(rand_matrix(r, 1), None, f"T{i}") for i in range(m)]
    y = list(r.normal(size=m) + 1j * r.normal(size=m))
    U = bc.lcu(y, terms)
    expect = sum(c * t.reference_matrix() for c, t in zip(y, terms))
    assert bc.verify(U, expect, use_fast=False) <= 1e-9 * U.alpha
    assert np.linalg.norm(expect, 2) <= U.alpha * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=9).filter(lambda v: sum(map(abs, v)) > 1e-6),
       st.integers(0, 2**31 - 1))
@example([1.0], 0)
@example([1.0, 3.7e-242], 0)
@example([0.5, -0.25j, 0.125, 1e-9], 3)
def test_prep_pair_weights(y, seed):
    rel = np.random.default_rng(seed).uniform(0.1, 1, len(y))
    prep = bc.StatePreparationPair.build(y, rel)
    w = prep.weights[: len(y)] * prep.alpha_prep
    assert np.allclose(w, np.array(y) * rel, atol=1e-9 * max(1, prep.alpha_prep))
    assert np.allclose(prep.weights[len(y):], 0, atol=1e-12)
    for u in (prep.prep_left, prep.prep_right):
        assert np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10)

"""Block-encoding calculus with (alpha, ancillas, eps) bookkeeping and query counters.

A :class:`BlockEncoding` pairs metadata with a matrix-free unitary action on
``ancillas + sys_qubits`` qubits (ancillas most significant). The encoded block is
``alpha * (<0^a| (x) I) U (|0^a> (x) I)``.

Metadata arithmetic only uses ``+``, ``*`` and ``max`` so exact number types
(``fractions.Fraction``, integers) propagate exactly through products and LCUs.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import statevec as sv
from .linalg import check_cap, spectral_norm

#: Two-qubit gates charged per Toffoli.
GATES_PER_TOFFOLI = 6


def ceil_log2(m: int) -> int:
    """Smallest p with 2**p >= m (0 for m <= 1)."""
    return max(0, int(m - 1).bit_length())


def and_ladder_toffolis(k: int) -> int:
    """Toffolis in one AND ladder over ``k`` control qubits."""
    return 4 * k - 2 if k >= 1 else 0


def mcx_gates(c: int) -> int:
    """Two-qubit gates for an X with ``c`` controls."""
    if c <= 0:
        return 0
    if c == 1:
        return 1
    if c == 2:
        return GATES_PER_TOFFOLI
    return GATES_PER_TOFFOLI * 4 * (c - 2)


# --- counter label helpers ----------------------------------------------------------

_PLAIN = ("toffoli",)


def ctrl_label(label: str) -> str:
    if label in _PLAIN or label.startswith("ctrl("):
        return label
    return f"ctrl({label})"


def adj_label(label: str) -> str:
    if label in _PLAIN:
        return label
    if label.startswith("ctrl(") and label.endswith(")"):
        return f"ctrl({adj_label(label[5:-1])})"
    return label[:-4] if label.endswith("^dag") else label + "^dag"


def merge_counters(*maps: Mapping[str, int], scale: Sequence[int] | None = None) -> dict[str, int]:
    out: dict[str, int] = {}
    for i, m in enumerate(maps):
        s = 1 if scale is None else scale[i]
        for k, v in m.items():
            out[k] = out.get(k, 0) + s * v
    return {k: v for k, v in out.items() if v}


def _ctrl_counters(m: Mapping[str, int]) -> dict[str, int]:
    out: dict[str, int] = {}
    for k, v in m.items():
        out[ctrl_label(k)] = out.get(ctrl_label(k), 0) + v
    return out


# --- core type -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlockEncoding:
    alpha: float
    ancillas: int
    eps: float
    sys_qubits: int
    action: sv.ActionNode
    counters: Mapping[str, int] = field(default_factory=dict)
    gate_count: int = 0
    label: str = ""
    reference: Callable[[], np.ndarray] | None = None
    #: Optional projected block maps ``x -> <0|U|0> x`` (and its adjoint) on rows.
    fast: Callable[[np.ndarray], np.ndarray] | None = None
    fast_adj: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.action.num_qubits != self.ancillas + self.sys_qubits:
            raise ValueError(
                f"action acts on {self.action.num_qubits} qubits, "
                f"expected {self.ancillas} + {self.sys_qubits}"
            )
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def num_qubits(self) -> int:
        return self.ancillas + self.sys_qubits

    @property
    def triple(self):
        return (self.alpha, self.ancillas, self.eps)

    def replace(self, **kw) -> "BlockEncoding":
        return dataclasses.replace(self, **kw)

    def _project(self, x: np.ndarray, adjoint: bool) -> np.ndarray:
        d = x.shape[1]
        out = np.empty_like(x, dtype=complex)
        rows = max(1, 2**22 // 2**self.num_qubits)
        run = self.action.apply_adjoint if adjoint else self.action.apply
        for s in range(0, x.shape[0], rows):
            chunk = x[s:s + rows]
            y = np.zeros((chunk.shape[0], 2**self.num_qubits), dtype=complex)
            y[:, :d] = chunk
            out[s:s + rows] = run(y)[:, :d]
        return out

    def block_action(self, x: np.ndarray) -> np.ndarray:
        """Apply the unscaled block ``<0|U|0>`` to rows of ``x``."""
        x = np.asarray(x, dtype=complex)
        return self.fast(x) if self.fast is not None else self._project(x, False)

    def block_action_adjoint(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return self.fast_adj(x) if self.fast_adj is not None else self._project(x, True)

    def reference_matrix(self) -> np.ndarray | None:
        return None if self.reference is None else np.asarray(self.reference(), dtype=complex)


# --- state-preparation pairs ---------------------------------------------------------

def _complete_unitary(c: np.ndarray) -> np.ndarray:
    """A unitary whose first column is the unit vector ``c`` (Householder)."""
    c = np.asarray(c, dtype=complex)
    phase = c[0] / abs(c[0]) if abs(c[0]) > 0 else 1.0
    cp = c / phase
    e0 = np.zeros_like(cp)
    e0[0] = 1.0
    u = e0 - cp
    nu = np.linalg.norm(u)
    if nu < 1e-15:
        return phase * np.eye(c.size, dtype=complex)
    u /= nu
    return phase * (np.eye(c.size, dtype=complex) - 2.0 * np.outer(u, u.conj()))


def _split_weights(w: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors ``c, d`` of length ``size`` with ``conj(c_j) d_j = w_j``.

    Requires ``sum |w| <= 1``; entries beyond ``len(w)`` get zero product.
    """
    w = np.concatenate([np.asarray(w, dtype=complex), np.zeros(size - len(w), dtype=complex)])
    aw = np.abs(w)
    s = aw.sum()
    if s > 1.0 + 1e-12:
        raise ValueError("weights exceed unit l1 norm")
    c = np.zeros(size, dtype=complex)
    d = np.zeros(size, dtype=complex)
    nz = aw > 0
    if abs(s - 1.0) <= 1e-12:
        c[nz] = np.sqrt(aw[nz] / s)
        d[nz] = w[nz] / c[nz]
        return c, d / np.linalg.norm(d)
    free = np.flatnonzero(~nz)
    if free.size:
        c[nz] = np.sqrt(aw[nz] / s)
        d[nz] = w[nz] / c[nz]
        d[free[0]] = np.sqrt(max(0.0, 1.0 - s * s))
        return c, d
    # Every index carries weight: |c_j|^2 = tau |w_j| off the largest entry and
    # 1 - tau s1 on it; unit |d| makes tau a root of s1 tau^2 - B tau + s1 = 0.
    if size == 1:
        raise ValueError("a single sub-unit weight needs a spare basis state")
    order = np.argsort(-aw, kind="stable")
    w0 = aw[order[0]]
    s1 = float(np.sum(np.delete(aw, order[0])))  # s - w0 cancels for tiny entries
    B = 1.0 + s1 * s1 - w0 * w0
    tau = 2 * s1 / (B + np.sqrt((1 - s) * (1 - s1 + w0) * (B + 2 * s1)))
    root_t = np.sqrt(tau) * np.sqrt(aw)
    root_t[order[0]] = np.sqrt(1.0 - tau * s1)
    c = root_t.astype(complex)
    d = w / c
    return c, d


@dataclass(frozen=True, eq=False)
class StatePreparationPair:
    """LCU coefficient loader ``(P_L, P_R)`` with ``eps_prep = 0``.

    ``rel`` holds ``alpha_j / max(alpha)`` of the terms; the first columns ``c, d``
    satisfy ``alpha_prep * conj(c_j) d_j = y_j * rel_j``.
    """

    y: tuple
    prep_left: np.ndarray
    prep_right: np.ndarray
    rel: tuple = ()
    eps_prep: float = 0

    @property
    def m(self) -> int:
        return len(self.y)

    @property
    def qubits(self) -> int:
        return int(self.prep_left.shape[0]).bit_length() - 1

    @property
    def alpha_prep(self):
        return l1_norm(self.y)

    @property
    def weights(self) -> np.ndarray:
        """``conj(c_j) d_j`` over the full prepare register."""
        return self.prep_left[:, 0].conj() * self.prep_right[:, 0]

    @classmethod
    def build(cls, y: Sequence, rel: Sequence[float] | None = None) -> "StatePreparationPair":
        y = tuple(y)
        if not y:
            raise ValueError("empty coefficient vector")
        norm = float(l1_norm(y))
        if norm == 0:
            raise ValueError("coefficient vector has zero l1 norm")
        rel = tuple(float(r) for r in (rel if rel is not None else [1.0] * len(y)))
        w = np.array([complex(v) for v in y]) * np.array(rel) / norm
        size = 2 ** ceil_log2(len(y))
        if size == 1 and abs(w[0]) < 1.0 - 1e-12:
            size = 2  # a lone sub-unit weight needs a spare basis state
        c, d = _split_weights(w, size)
        return cls(y, _complete_unitary(c), _complete_unitary(d), rel)


def l1_norm(y):
    total = 0
    for v in y:
        total = total + abs(v)
    return total


def _prep_gates(vec: np.ndarray) -> int:
    return 2 * max(0, int(np.count_nonzero(np.abs(vec) > 1e-15)) - 1)


# --- constructions -------------------------------------------------------------------

def identity_be(n: int, label: str = "I") -> BlockEncoding:
    if n < 1:
        raise ValueError("identity_be needs n >= 1")
    return BlockEncoding(1, 0, 0, n, sv.Identity(n), {}, 0, label,
                         reference=lambda: np.eye(2**n, dtype=complex),
                         fast=lambda x: x, fast_adj=lambda x: x)


def scale_phase(U: BlockEncoding, phase: complex, label: str | None = None) -> BlockEncoding:
    """Multiply the encoded operator by a unit-modulus ``phase``."""
    ref = U.reference
    fast, fadj = U.fast, U.fast_adj
    return U.replace(
        action=sv.compose(U.action, sv.GlobalPhase(U.num_qubits, phase)),
        label=label or U.label,
        reference=None if ref is None else (lambda: phase * ref()),
        fast=None if fast is None else (lambda x: phase * fast(x)),
        fast_adj=None if fadj is None else (lambda x: np.conj(phase) * fadj(x)),
    )


def product(*Us: BlockEncoding, label: str | None = None) -> BlockEncoding:
    """Encoding of the operator product ``A_0 A_1 ... A_{r-1}``.

    For two factors the layout is ``anc_A | anc_B | sys``; ``U_B`` acts first.
    """
    if len(Us) < 2:
        raise ValueError("product needs at least two encodings")
    if len(Us) > 2:
        out = Us[0]
        for U in Us[1:]:
            out = product(out, U)
        return out.replace(label=label) if label else out
    A, B = Us
    if A.sys_qubits != B.sys_qubits:
        raise ValueError("mismatched system size in product")
    aA, aB, n = A.ancillas, B.ancillas, A.sys_qubits
    nq = aA + aB + n
    sys_q = tuple(range(aA + aB, nq))
    action = sv.compose(
        sv.embed(B.action, nq, tuple(range(aA, aA + aB)) + sys_q),
        sv.embed(A.action, nq, tuple(range(aA)) + sys_q),
    )
    ref = None
    if A.reference is not None and B.reference is not None:
        ref = lambda: A.reference_matrix() @ B.reference_matrix()
    return BlockEncoding(
        A.alpha * B.alpha, aA + aB, A.alpha * B.eps + B.alpha * A.eps, n, action,
        merge_counters(A.counters, B.counters), A.gate_count + B.gate_count,
        label or f"{A.label}*{B.label}", ref,
        fast=lambda x: A.block_action(B.block_action(x)),
        fast_adj=lambda x: B.block_action_adjoint(A.block_action_adjoint(x)),
    )


def lcu(prep: StatePreparationPair | Sequence, terms: Sequence[BlockEncoding],
        label: str = "lcu") -> BlockEncoding:
    """Linear combination ``sum_j y_j A_j`` of block-encoded terms.

    ``prep`` is either a :class:`StatePreparationPair` or the coefficient list.
    Layout ``prep | anc | sys``; a term with fewer ancillas uses the trailing
    ancilla qubits and leaves the leading ones idle. Selector values ``>= m``
    apply the identity.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("lcu needs at least one term")
    y = prep.y if isinstance(prep, StatePreparationPair) else tuple(prep)
    if len(y) != len(terms):
        raise ValueError("coefficient count does not match term count")
    n = terms[0].sys_qubits
    if any(t.sys_qubits != n for t in terms):
        raise ValueError("lcu terms act on different system sizes")
    alpha = max(t.alpha for t in terms)
    eps = max(t.eps for t in terms)
    rel = [float(t.alpha) / float(alpha) for t in terms]
    if not (isinstance(prep, StatePreparationPair) and np.allclose(prep.rel, rel)):
        prep = StatePreparationPair.build(y, rel)
    norm = prep.alpha_prep
    p = prep.qubits
    a = max(t.ancillas for t in terms)
    nq = p + a + n
    children = tuple(
        (j, sv.embed(t.action, a + n, tuple(range(a - t.ancillas, a + n))))
        for j, t in enumerate(terms)
    )
    prep_q = tuple(range(p))
    action = sv.compose(
        sv.embed(sv.DenseUnitary(prep.prep_right, "prep_R"), nq, prep_q),
        sv.Select(nq, prep_q, tuple(range(p, nq)), children),
        sv.embed(sv.Adjoint(sv.DenseUnitary(prep.prep_left, "prep_L")), nq, prep_q),
    )
    own_toffoli = 2 * len(terms) * and_ladder_toffolis(p) if p >= 2 else 0
    counters = merge_counters(*[_ctrl_counters(t.counters) for t in terms],
                              {"toffoli": own_toffoli})
    gates = (_prep_gates(prep.prep_left[:, 0]) + _prep_gates(prep.prep_right[:, 0])
             + sum(t.gate_count for t in terms) + GATES_PER_TOFFOLI * own_toffoli)
    w = prep.weights[: len(terms)]
    ref = None
    if all(t.reference is not None for t in terms):
        ref = lambda: sum(complex(yj) * t.reference_matrix() for yj, t in zip(y, terms))

    def fast(x):
        return sum(wj * t.block_action(x) for wj, t in zip(w, terms) if wj != 0)

    def fast_adj(x):
        return sum(np.conj(wj) * t.block_action_adjoint(x) for wj, t in zip(w, terms) if wj != 0)

    return BlockEncoding(alpha * norm, a + p, eps * norm, n, action, counters, gates, label, ref,
                         fast=fast, fast_adj=fast_adj)


def _x_node(width: int) -> sv.ActionNode:
    """X on the first of ``width`` qubits."""
    return sv.embed(sv.DenseUnitary(np.array([[0, 1], [1, 0]])), width, (0,))


def _padded(U: BlockEncoding, a: int) -> sv.ActionNode:
    """``U``'s action on ``a`` ancillas (leading ones idle) followed by the system."""
    return sv.embed(U.action, a + U.sys_qubits, tuple(range(a - U.ancillas, a + U.sys_qubits)))


def _sector_fast(k, n, parts, adjoint=False):
    """Projected map for selector constructions.

    ``parts`` lists ``(out_sector, in_sector, coef, U)``: block ``coef * A/alpha``
    from selector value ``in_sector`` to ``out_sector``.
    """
    def f(x):
        t = x.reshape(x.shape[0], 2**k, 2**n)
        out = np.zeros_like(t)
        for o, i, coef, U in parts:
            if adjoint:
                out[:, i] += np.conj(coef) * U.block_action_adjoint(t[:, o])
            else:
                out[:, o] += coef * U.block_action(t[:, i])
        return out.reshape(x.shape[0], -1)
    return f


def _sector_reference(k, n, parts):
    def ref():
        m = np.zeros((2**k * 2**n,) * 2, dtype=complex)
        N = 2**n
        for o, i, coef, U in parts:
            m[o * N:(o + 1) * N, i * N:(i + 1) * N] += coef * U.reference_matrix()
        return m
    if all(U.reference is not None for *_, U in parts):
        return ref
    return None


def _check_selector(j: int, k: int):
    if k < 1:
        raise ValueError("selector needs k >= 1 qubits")
    if not 1 <= j <= 2**k - 1:
        raise ValueError(f"selector index j={j} outside 1..{2**k - 1}")


def _and_permutation(k: int, targets: Sequence[int]) -> np.ndarray:
    """Basis permutation on ``flags(len(targets)) | sel(k)`` toggling flag i iff sel == targets[i]."""
    f = len(targets)
    idx = np.arange(2 ** (f + k))
    flags, sel = idx >> k, idx & (2**k - 1)
    for i, v in enumerate(targets):
        bit = 1 << (f - 1 - i)
        flags = np.where(sel == v, flags ^ bit, flags)
    return (flags << k) | sel


def selector_offdiag(j: int, U1: BlockEncoding, U2: BlockEncoding, k: int,
                     explicit_flags: bool = False, label: str | None = None) -> BlockEncoding:
    """Encoding of ``|0><j| (x) A1 + |j><0| (x) A2`` on layout ``anc | sel(k) | sys``.

    The selector SWAP_{0,j} runs first; ``U1`` then fires on selector value 0 and
    ``U2`` on value ``j``, and X on the first ancilla zeroes every other sector.
    By default the two flag qubits are folded into predicate controls (they return
    clean); ``explicit_flags`` simulates them as borrowed work qubits.
    """
    _check_selector(j, k)
    if U1.sys_qubits != U2.sys_qubits:
        raise ValueError("mismatched system size in selector")
    if U1.alpha != U2.alpha and not math.isclose(float(U1.alpha), float(U2.alpha), rel_tol=1e-12):
        raise ValueError("selector inputs must share alpha")
    n = U1.sys_qubits
    a = max(U1.ancillas, U2.ancillas)
    if a == 0 and 2**k > 2:
        a = 1
    nq = a + k + n
    sel = tuple(range(a, a + k))
    tgt = tuple(range(a)) + tuple(range(a + k, nq))
    perm = np.arange(2**k)
    perm[0], perm[j] = j, 0
    swap = sv.embed(sv.Permutation(k, perm), nq, sel)
    u1, u2 = _padded(U1, a), _padded(U2, a)
    others = [v for v in range(2**k) if v not in (0, j)]
    xn = _x_node(a + n) if others else None
    if not explicit_flags:
        children = ((0, u1), (j, u2)) + tuple((v, xn) for v in others)
        action = sv.compose(swap, sv.Select(nq, sel, tgt, children))
    else:
        # work layout: f_j | f_0 | anc | sel | sys
        wq = nq + 2
        shift = lambda qs: tuple(q + 2 for q in qs)
        flag_q = (0, 1)
        and_gate = sv.embed(sv.Permutation(2 + k, _and_permutation(k, (j, 0))), wq,
                            flag_q + shift(sel))
        body = sv.Select(wq, flag_q, shift(tgt), ((0b01, u1), (0b10, u2))
                         + (((0b00, xn),) if xn is not None else ()))
        inner = sv.compose(sv.embed(swap, wq, tuple(range(2, wq))), and_gate, body, and_gate)
        action = sv.WorkQubits(inner, 2)
    tof = 4 * and_ladder_toffolis(k)
    parts = [(0, j, 1.0, U1), (j, 0, 1.0, U2)]
    return BlockEncoding(
        U1.alpha, a, max(U1.eps, U2.eps), k + n, action,
        merge_counters(_ctrl_counters(U1.counters), _ctrl_counters(U2.counters), {"toffoli": tof}),
        U1.gate_count + U2.gate_count + GATES_PER_TOFFOLI * tof + 2 * k,
        label or f"M_{j}", _sector_reference(k, n, parts),
        fast=_sector_fast(k, n, parts), fast_adj=_sector_fast(k, n, parts, adjoint=True),
    )


def selector_diag(j: int, U: BlockEncoding, k: int, label: str | None = None) -> BlockEncoding:
    """Encoding of ``|j><j| (x) A`` on layout ``anc | sel(k) | sys``."""
    if not 0 <= j <= 2**k - 1:
        raise ValueError(f"selector index j={j} outside 0..{2**k - 1}")
    n = U.sys_qubits
    a = U.ancillas if (U.ancillas or 2**k == 1) else 1
    nq = a + k + n
    sel = tuple(range(a, a + k))
    tgt = tuple(range(a)) + tuple(range(a + k, nq))
    others = [v for v in range(2**k) if v != j]
    xn = _x_node(a + n) if others else None
    children = ((j, _padded(U, a)),) + tuple((v, xn) for v in others)
    tof = 2 * and_ladder_toffolis(k)
    parts = [(j, j, 1.0, U)]
    return BlockEncoding(
        U.alpha, a, U.eps, k + n, sv.Select(nq, sel, tgt, children),
        merge_counters(_ctrl_counters(U.counters), {"toffoli": tof}),
        U.gate_count + GATES_PER_TOFFOLI * tof, label or f"P_{j}",
        _sector_reference(k, n, parts),
        fast=_sector_fast(k, n, parts), fast_adj=_sector_fast(k, n, parts, adjoint=True),
    )


def selector_offdiag_shared(j: int, U: BlockEncoding, k: int, phase: complex = -1,
                            label: str | None = None) -> BlockEncoding:
    """Encoding of ``|0><j| (x) B + phase |j><0| (x) B`` with one controlled use of ``U``.

    ``U`` fires on selector values ``{0, j}``; a phased swap then routes
    ``|j> -> |0>`` and ``|0> -> phase |j>``.
    """
    _check_selector(j, k)
    if abs(abs(phase) - 1.0) > 1e-12:
        raise ValueError("phase must have unit modulus")
    n = U.sys_qubits
    a = U.ancillas if (U.ancillas or 2**k == 2) else 1
    nq = a + k + n
    sel = tuple(range(a, a + k))
    tgt = tuple(range(a)) + tuple(range(a + k, nq))
    others = [v for v in range(2**k) if v not in (0, j)]
    xn = _x_node(a + n) if others else None
    uu = _padded(U, a)
    children = ((0, uu), (j, uu)) + tuple((v, xn) for v in others)
    route = np.eye(2**k, dtype=complex)
    route[:, [0, j]] = 0
    route[0, j] = 1.0
    route[j, 0] = phase
    action = sv.compose(sv.Select(nq, sel, tgt, children),
                        sv.embed(sv.DenseUnitary(route), nq, sel))
    tof = 4 * and_ladder_toffolis(k)
    parts = [(0, j, 1.0, U), (j, 0, phase, U)]
    return BlockEncoding(
        U.alpha, a, U.eps, k + n, action,
        merge_counters(_ctrl_counters(U.counters), {"toffoli": tof}),
        U.gate_count + GATES_PER_TOFFOLI * tof + 2 * k, label or f"M_{j}^shared",
        _sector_reference(k, n, parts),
        fast=_sector_fast(k, n, parts), fast_adj=_sector_fast(k, n, parts, adjoint=True),
    )


def adjoint(U: BlockEncoding) -> BlockEncoding:
    ref = U.reference
    return U.replace(
        action=sv.adjoint(U.action),
        counters={adj_label(k): v for k, v in U.counters.items()},
        label=adj_label(U.label) if U.label else U.label,
        reference=None if ref is None else (lambda: ref().conj().T),
        fast=U.fast_adj, fast_adj=U.fast,
    )


def controlled(U: BlockEncoding, ctrl_qubits: int = 1) -> BlockEncoding:
    """Apply ``U`` when all ``ctrl_qubits`` controls are one; layout ``anc | ctrl | sys``.

    The block is ``(I - P) (x) I + P (x) A/alpha`` with ``P`` the all-ones projector.
    """
    if ctrl_qubits < 1:
        raise ValueError("ctrl_qubits must be >= 1")
    a, c, n = U.ancillas, ctrl_qubits, U.sys_qubits
    nq = a + c + n
    ctrl = tuple(range(a, a + c))
    tgt = tuple(range(a)) + tuple(range(a + c, nq))
    action = sv.controlled(U.action, nq, ctrl, tgt)
    top = 2**c - 1
    tof = 2 * and_ladder_toffolis(c) if c >= 2 else 0
    alpha = U.alpha

    def ref():
        N = 2**n
        m = float(alpha) * np.eye(2**c * N, dtype=complex)
        m[top * N:, top * N:] = U.reference_matrix()
        return m

    def make_fast(adjoint):
        def f(x):
            t = x.reshape(x.shape[0], 2**c, 2**n).copy()
            t[:, top] = (U.block_action_adjoint if adjoint else U.block_action)(t[:, top])
            return t.reshape(x.shape[0], -1)
        return f

    return BlockEncoding(
        U.alpha, a, U.eps, c + n, action,
        merge_counters(_ctrl_counters(U.counters), {"toffoli": tof}),
        U.gate_count + GATES_PER_TOFFOLI * tof, f"ctrl({U.label})",
        ref if U.reference is not None else None,
        fast=make_fast(False), fast_adj=make_fast(True),
    )


def chebyshev_matrix(H: np.ndarray, k: int) -> np.ndarray:
    """``T_k(H)`` by the three-term recurrence."""
    I = np.eye(H.shape[0], dtype=complex)
    if k == 0:
        return I
    t0, t1 = I, np.asarray(H, dtype=complex)
    for _ in range(k - 1):
        t0, t1 = t1, 2 * H @ t1 - t0
    return t1


def chebyshev(U: BlockEncoding, k: int, check: bool = True) -> BlockEncoding:
    """Encoding of ``T_k(H/alpha)`` for a block-encoded Hermitian ``H``.

    Alternates ``U`` and ``U^dag`` separated by reflections about the zero ancilla
    state. Layout ``work | anc | sys``; the work qubit hosts the reflection.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    if check and U.reference is not None and 2**U.sys_qubits <= 2**10:
        H = U.reference_matrix()
        if np.max(np.abs(H - H.conj().T), initial=0.0) > 1e-10:
            raise ValueError("chebyshev needs a Hermitian reference block")
    a, n = U.ancillas, U.sys_qubits
    nq = 1 + a + n
    u = sv.embed(U.action, nq, tuple(range(1, nq)))
    refl = sv.Reflection(nq, tuple(range(1 + a)))
    seq: list[sv.ActionNode] = []
    for i in range(k):
        if i:
            seq.append(refl)
        seq.append(u if i % 2 == 0 else sv.adjoint(u))
    action = sv.compose(*seq) if seq else sv.Identity(nq)
    n_fwd, n_adj = (k + 1) // 2, k // 2
    counters = merge_counters(U.counters, {adj_label(l): v for l, v in U.counters.items()},
                              scale=[n_fwd, n_adj])
    gates = k * U.gate_count + max(0, k - 1) * (mcx_gates(a) + 2)
    alpha = U.alpha
    ref = None
    if U.reference is not None:
        ref = lambda: chebyshev_matrix(U.reference_matrix() / float(alpha), k)
    # U_k(A) - U_k(B) = 2 sum_j U_j(A) (A-B) U_{k-1-j}(B) with |U_j| <= j+1 gives
    # |T_k(A) - T_k(B)| <= k (k^2 + 2) / 3 |A - B|; the linear k bound fails near +-1.
    eps = k * (k * k + 2) * U.eps / (3 * U.alpha)
    return BlockEncoding(1, a + 1, eps, n, action, counters, gates,
                         f"T_{k}({U.label})", ref)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    lam, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(lam, 0.0, None))) @ v.conj().T


def dilation_be(A: np.ndarray, alpha: float | None = None, label: str = "dil",
                eps: float = 0.0, counters: Mapping[str, int] | None = None,
                gate_count: int = 0) -> BlockEncoding:
    """One-ancilla unitary dilation of ``A/alpha``.

    A 1-D ``A`` is read as a diagonal and dilated entrywise.
    """
    A = np.asarray(A, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise ValueError("invalid matrix: non-finite entries")
    diag = A.ndim == 1
    N = A.shape[0]
    n = int(round(np.log2(N)))
    if 2**n != N:
        raise ValueError("dimension must be a power of two")
    if alpha is None:
        alpha = float(np.max(np.abs(A))) if diag else spectral_norm(A) * (1 + 1e-6)
        alpha = alpha or 1.0
    s = A / alpha
    if diag:
        if np.max(np.abs(s)) > 1 + 1e-12:
            raise ValueError("alpha smaller than the operator norm")
        r = np.sqrt(np.clip(1 - np.abs(s) ** 2, 0.0, None))
        action = sv.Multiplexed2x2(n + 1, (s, r, r, -s.conj()))
        ref = lambda: np.diag(A)
        fast = lambda x: x * s
        fadj = lambda x: x * s.conj()
    else:
        check_cap(2 * N, "dilation")
        if spectral_norm(s) > 1 + 1e-9:
            raise ValueError("alpha smaller than the operator norm")
        I = np.eye(N)
        u = np.block([[s, _psd_sqrt(I - s @ s.conj().T)],
                      [_psd_sqrt(I - s.conj().T @ s), -s.conj().T]])
        action = sv.DenseUnitary(u, label)
        ref = lambda: A
        fast = lambda x: x @ s.T
        fadj = lambda x: x @ s.conj()
    return BlockEncoding(alpha, 1, eps, n, action, dict(counters or {label: 1}), gate_count,
                         label, ref, fast=fast, fast_adj=fadj)


def diag_be_values(values: np.ndarray, alpha: float | None = None, label: str = "diag",
                   **kw) -> BlockEncoding:
    """Exact diagonal encoding of the given entries."""
    return dilation_be(np.asarray(values, dtype=complex).ravel(), alpha, label, **kw)


def lift_matrix(A: np.ndarray, total: int, qubits: Sequence[int]) -> np.ndarray:
    """Dense ``A`` acting on ``qubits`` of a ``total``-qubit register."""
    check_cap(2**total, "lifted operator")
    eye = np.eye(2**total, dtype=complex)
    return sv.apply_on(eye, total, qubits, lambda t: t @ np.asarray(A).T).T


def lift(U: BlockEncoding, total_sys: int, qubits: Sequence[int]) -> BlockEncoding:
    """Act with ``U`` on the system qubits ``qubits`` of a larger ``total_sys`` register."""
    qubits = tuple(qubits)
    if len(qubits) != U.sys_qubits:
        raise ValueError("slice mismatch for lift")
    a = U.ancillas
    nq = a + total_sys
    action = sv.embed(U.action, nq, tuple(range(a)) + tuple(a + q for q in qubits))
    ref = None
    if U.reference is not None:
        ref = lambda: lift_matrix(U.reference_matrix(), total_sys, qubits)
    return U.replace(
        sys_qubits=total_sys, action=action, reference=ref,
        fast=lambda x: sv.apply_on(x, total_sys, qubits, U.block_action),
        fast_adj=lambda x: sv.apply_on(x, total_sys, qubits, U.block_action_adjoint),
    )


# --- materialization and verification ------------------------------------------------

def materialize_block(U: BlockEncoding, use_fast: bool = True) -> np.ndarray:
    """``alpha * <0^a|U|0^a>`` as a dense matrix.

    The cap bounds the output dimension ``2**sys_qubits``; the unitary itself is
    applied column batch by column batch and never stored.
    """
    N = 2**U.sys_qubits
    check_cap(N, "encoded block")
    eye = np.eye(N, dtype=complex)
    blk = U.block_action(eye) if use_fast else U._project(eye, False)
    return float(U.alpha) * blk.T


def materialize_unitary(U: BlockEncoding) -> np.ndarray:
    check_cap(2**U.num_qubits, "block-encoding unitary")
    return U.action.dense()


def verify(U: BlockEncoding, reference: np.ndarray | None = None, use_fast: bool = True) -> float:
    """Spectral-norm deviation between ``reference`` and the materialized block."""
    if reference is None:
        reference = U.reference_matrix()
        if reference is None:
            raise ValueError("no reference attached")
    return spectral_norm(np.asarray(reference) - materialize_block(U, use_fast))


def verify_ok(U: BlockEncoding, reference: np.ndarray | None = None, slack: float = 1e-10,
              use_fast: bool = True) -> bool:
    return verify(U, reference, use_fast) <= float(U.eps) + slack

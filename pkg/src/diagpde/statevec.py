"""Matrix-free application of structured unitaries to batches of state vectors.

Every node acts on arrays of shape ``(batch, 2**num_qubits)``; each row is one
state. Qubit ``0`` is the most significant bit of the amplitude index, and a
register occupies consecutive bits, so for the 3-qubit layout ``anc(1) | sys(2)``
the amplitude of ``|anc=1, sys=2>`` sits at index ``0b1_10 = 6``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .linalg import StateVector, check_cap


def apply_on(x: np.ndarray, nq: int, qubits: Sequence[int], fn) -> np.ndarray:
    """Apply ``fn`` to the sub-register ``qubits`` of every state in ``x``.

    ``fn`` receives rows of length ``2**len(qubits)`` with the listed qubits in
    the given order (first = most significant) and must return the same shape.
    """
    qubits = tuple(int(q) for q in qubits)
    batch = x.shape[0]
    k = len(qubits)
    if qubits == tuple(range(nq - k, nq)):
        return fn(x.reshape(-1, 2**k)).reshape(batch, -1)
    chosen = set(qubits)
    if len(chosen) != k or any(q < 0 or q >= nq for q in qubits):
        raise ValueError(f"bad qubit slice {qubits} for {nq} qubits")
    order = [q for q in range(nq) if q not in chosen] + list(qubits)
    groups: list[list[int]] = []
    for q in order:
        if groups and groups[-1][-1] + 1 == q:
            groups[-1].append(q)
        else:
            groups.append([q])
    by_start = sorted(range(len(groups)), key=lambda g: groups[g][0])
    axis_of = {g: i + 1 for i, g in enumerate(by_start)}
    perm = [0] + [axis_of[g] for g in range(len(groups))]
    shape = [batch] + [2 ** len(groups[g]) for g in by_start]
    t = x.reshape(shape).transpose(perm).reshape(-1, 2**k)
    y = fn(np.ascontiguousarray(t))
    new_shape = [batch] + [2 ** len(g) for g in groups]
    return y.reshape(new_shape).transpose(np.argsort(perm)).reshape(batch, -1)


class ActionNode:
    """A unitary on ``num_qubits`` qubits with forward and adjoint application."""

    kind = "abstract"
    num_qubits: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    def dense(self) -> np.ndarray:
        check_cap(self.dim, f"{self.kind} unitary")
        return self.apply(np.eye(self.dim, dtype=complex)).T


@dataclass(frozen=True, eq=False)
class Identity(ActionNode):
    num_qubits: int
    kind = "identity"

    def apply(self, x):
        return x

    apply_adjoint = apply


@dataclass(frozen=True, eq=False)
class GlobalPhase(ActionNode):
    num_qubits: int
    phase: complex
    kind = "phase"

    def apply(self, x):
        return x * self.phase

    def apply_adjoint(self, x):
        return x * np.conj(self.phase)


class PhaseDiag(ActionNode):
    """``diag(exp(i * angles))``; the angle table may be built lazily."""

    kind = "phase_diag"

    def __init__(self, num_qubits: int, angles: np.ndarray | Callable[[], np.ndarray]):
        self.num_qubits = num_qubits
        self._angles = angles

    @cached_property
    def phases(self) -> np.ndarray:
        a = self._angles() if callable(self._angles) else self._angles
        a = np.asarray(a, dtype=float).ravel()
        if a.size != 2**self.num_qubits:
            raise ValueError("angle table has the wrong length")
        return np.exp(1j * a)

    def apply(self, x):
        return x * self.phases

    def apply_adjoint(self, x):
        return x * self.phases.conj()


class SignDiag(ActionNode):
    """``diag(+-1)`` given a boolean mask of the ``-1`` entries."""

    kind = "reflection"

    def __init__(self, num_qubits: int, negative: np.ndarray | Callable[[], np.ndarray]):
        self.num_qubits = num_qubits
        self._negative = negative

    @cached_property
    def signs(self) -> np.ndarray:
        m = self._negative() if callable(self._negative) else self._negative
        m = np.asarray(m, dtype=bool).ravel()
        if m.size != 2**self.num_qubits:
            raise ValueError("mask has the wrong length")
        return np.where(m, -1.0, 1.0)

    def apply(self, x):
        return x * self.signs

    apply_adjoint = apply


@dataclass(frozen=True, eq=False)
class Reflection(ActionNode):
    """``2|0><0| - I`` on ``qubits`` (all qubits when ``None``)."""

    num_qubits: int
    qubits: tuple[int, ...] | None = None
    kind = "reflection"

    def apply(self, x):
        def fn(t):
            t = -t
            t[:, 0] *= -1.0
            return t

        if self.qubits is None:
            return fn(x.copy())
        if not self.qubits:
            return x.copy()
        return apply_on(x, self.num_qubits, self.qubits, fn)

    apply_adjoint = apply


class DenseUnitary(ActionNode):
    kind = "prepare"

    def __init__(self, matrix: np.ndarray, label: str = ""):
        matrix = np.asarray(matrix, dtype=complex)
        n = int(round(np.log2(matrix.shape[0])))
        if matrix.shape != (2**n, 2**n):
            raise ValueError("dense unitary must be 2**n square")
        self.num_qubits = n
        self.matrix = matrix
        self.label = label

    def apply(self, x):
        return x @ self.matrix.T

    def apply_adjoint(self, x):
        return x @ self.matrix.conj()


class Permutation(ActionNode):
    """Basis permutation ``|i> -> |perm[i]>``."""

    kind = "permutation"

    def __init__(self, num_qubits: int, perm: np.ndarray):
        perm = np.asarray(perm, dtype=np.int64)
        if perm.size != 2**num_qubits or not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise ValueError("not a permutation of the basis")
        self.num_qubits = num_qubits
        self.perm = perm

    def apply(self, x):
        out = np.empty_like(x)
        out[:, self.perm] = x
        return out

    def apply_adjoint(self, x):
        return x[:, self.perm]


@dataclass(frozen=True, eq=False)
class CyclicShift(ActionNode):
    """``|j> -> |j + shift mod 2**n>``."""

    num_qubits: int
    shift: int
    kind = "cyclic_shift"

    def apply(self, x):
        return np.roll(x, self.shift, axis=1)

    def apply_adjoint(self, x):
        return np.roll(x, -self.shift, axis=1)


class Multiplexed2x2(ActionNode):
    """A 2x2 unitary on a leading ancilla, chosen per basis state of the rest.

    ``blocks`` holds arrays ``(u00, u01, u10, u11)`` indexed by the trailing
    register; the block ``[[u00, u01], [u10, u11]]`` acts on the ancilla.
    """

    kind = "multiplexed"

    def __init__(self, num_qubits: int, blocks: Callable[[], tuple] | tuple):
        self.num_qubits = num_qubits
        self._blocks = blocks

    @cached_property
    def blocks(self):
        b = self._blocks() if callable(self._blocks) else self._blocks
        return tuple(np.asarray(v, dtype=complex).ravel() for v in b)

    def _mix(self, x, u00, u01, u10, u11):
        t = x.reshape(x.shape[0], 2, -1)
        out = np.empty_like(t)
        out[:, 0] = u00 * t[:, 0] + u01 * t[:, 1]
        out[:, 1] = u10 * t[:, 0] + u11 * t[:, 1]
        return out.reshape(x.shape[0], -1)

    def apply(self, x):
        return self._mix(x, *self.blocks)

    def apply_adjoint(self, x):
        u00, u01, u10, u11 = self.blocks
        return self._mix(x, u00.conj(), u10.conj(), u01.conj(), u11.conj())


@dataclass(frozen=True, eq=False)
class Embed(ActionNode):
    """Apply ``child`` to ``qubits`` of a larger register."""

    child: ActionNode
    num_qubits: int
    qubits: tuple[int, ...]
    kind = "embed"

    def __post_init__(self):
        if len(self.qubits) != self.child.num_qubits:
            raise ValueError("slice width does not match the child node")

    def apply(self, x):
        return apply_on(x, self.num_qubits, self.qubits, self.child.apply)

    def apply_adjoint(self, x):
        return apply_on(x, self.num_qubits, self.qubits, self.child.apply_adjoint)


def embed(child: ActionNode, num_qubits: int, qubits: Sequence[int]) -> ActionNode:
    qubits = tuple(qubits)
    if num_qubits == child.num_qubits and qubits == tuple(range(num_qubits)):
        return child
    return Embed(child, num_qubits, qubits)


@dataclass(frozen=True, eq=False)
class Select(ActionNode):
    """``sum_v |v><v|_ctrl (x) children[v]`` on ``target``; identity elsewhere.

    ``children`` maps control values to nodes on the target register. A single
    control value reproduces a controlled gate.
    """

    num_qubits: int
    ctrl: tuple[int, ...]
    target: tuple[int, ...]
    children: tuple[tuple[int, ActionNode], ...]
    kind = "select"

    def _run(self, x, adjoint):
        c, k = len(self.ctrl), len(self.target)

        def fn(t):
            t = t.reshape(t.shape[0], 2**c, 2**k)
            for v, child in self.children:
                sub = t[:, v, :]
                t[:, v, :] = child.apply_adjoint(sub) if adjoint else child.apply(sub)
            return t.reshape(t.shape[0], -1)

        return apply_on(x, self.num_qubits, self.ctrl + self.target, fn)

    def apply(self, x):
        return self._run(x, False)

    def apply_adjoint(self, x):
        return self._run(x, True)


def controlled(child: ActionNode, num_qubits: int, ctrl: Sequence[int], target: Sequence[int],
               values: Sequence[int] | None = None) -> Select:
    """Apply ``child`` on ``target`` when the control register takes one of ``values``.

    The default fires on the all-ones control value.
    """
    ctrl = tuple(ctrl)
    if values is None:
        values = (2 ** len(ctrl) - 1,)
    return Select(num_qubits, ctrl, tuple(target), tuple((int(v), child) for v in values))


@dataclass(frozen=True, eq=False)
class Compose(ActionNode):
    """Apply ``children`` in order (first element acts first)."""

    children: tuple[ActionNode, ...]
    num_qubits: int
    kind = "compose"

    def apply(self, x):
        for c in self.children:
            x = c.apply(x)
        return x

    def apply_adjoint(self, x):
        for c in reversed(self.children):
            x = c.apply_adjoint(x)
        return x


@dataclass(frozen=True, eq=False)
class Adjoint(ActionNode):
    child: ActionNode
    kind = "adjoint"

    @property
    def num_qubits(self):
        return self.child.num_qubits

    def apply(self, x):
        return self.child.apply_adjoint(x)

    def apply_adjoint(self, x):
        return self.child.apply(x)


def adjoint(node: ActionNode) -> ActionNode:
    return node.child if isinstance(node, Adjoint) else Adjoint(node)


class WorkQubitError(RuntimeError):
    """Raised when borrowed work qubits are not returned to |0>."""


@dataclass(frozen=True, eq=False)
class WorkQubits(ActionNode):
    """Run ``child`` with ``extra`` leading work qubits that start and end in |0>."""

    child: ActionNode
    extra: int
    tol: float = 1e-9
    kind = "work"

    @property
    def num_qubits(self):
        return self.child.num_qubits - self.extra

    def _run(self, x, adjoint):
        d = x.shape[1]
        y = np.zeros((x.shape[0], d * 2**self.extra), dtype=complex)
        y[:, :d] = x
        y = self.child.apply_adjoint(y) if adjoint else self.child.apply(y)
        leak = np.linalg.norm(y[:, d:])
        if leak > self.tol * max(1.0, np.linalg.norm(x)):
            raise WorkQubitError(f"work qubits left dirty (leak {leak:.3e})")
        return y[:, :d]

    def apply(self, x):
        return self._run(x, False)

    def apply_adjoint(self, x):
        return self._run(x, True)


def compose(*nodes: ActionNode) -> ActionNode:
    if not nodes:
        raise ValueError("compose needs at least one node")
    first = nodes[0]
    nodes = tuple(n for n in nodes if not isinstance(n, Identity))
    if not nodes:
        return first
    if len(nodes) == 1:
        return nodes[0]
    nq = nodes[0].num_qubits
    if any(n.num_qubits != nq for n in nodes):
        raise ValueError("compose children act on different registers")
    return Compose(nodes, nq)


# --- state-vector level helpers -------------------------------------------------------

def apply(node: ActionNode, psi: StateVector) -> StateVector:
    """Apply ``node`` to ``psi``; the layout is preserved."""
    if node.num_qubits != psi.num_qubits:
        raise ValueError("slice mismatch: node and state have different qubit counts")
    out = node.apply(psi.amplitudes[None, :])[0]
    return StateVector(out, psi.layout, normalized=False)


class ProjectionError(RuntimeError):
    """Raised when a post-selected amplitude falls below the floor."""


def project_zero_ancilla(psi: StateVector, ancilla: str | tuple[int, int] = "anc",
                         floor: float = 1e-12) -> tuple[StateVector, float]:
    """Project the ancilla register onto |0...0> and renormalize.

    ``ancilla`` is a register label of ``psi.layout`` or an ``(offset, width)``
    qubit slice. Returns the projected state and the exact projection probability.
    """
    off, width = psi.register(ancilla) if isinstance(ancilla, str) else ancilla
    n = psi.num_qubits
    t = psi.amplitudes.reshape(2**off, 2**width, 2 ** (n - off - width))
    kept = t[:, 0, :].ravel()
    prob = float(np.vdot(kept, kept).real)
    if prob < floor:
        raise ProjectionError(f"projection probability {prob:.3e} below floor {floor:.1e}")
    layout = []
    pos = 0
    for name, w in psi.layout:
        if pos == off and w == width:
            pass
        elif pos <= off < pos + w or (off <= pos < off + width):
            raise ValueError("ancilla slice must coincide with one register")
        else:
            layout.append((name, w))
        pos += w
    return StateVector(kept / np.sqrt(prob), tuple(layout) or (("q", 0),)), prob

"""Dense linear-algebra substrate and verification oracles.

Register order is fixed everywhere in the package: ancilla | selector | design |
system, most significant qubit first. A vector index ``i`` over ``q`` qubits
therefore reads its leading register from the high bits of ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

#: Largest matrix dimension that may be materialized densely.
DEFAULT_CAP = 2**14

_cap = DEFAULT_CAP


class MaterializationError(RuntimeError):
    """Raised when a dense matrix would exceed the materialization cap."""


class InvalidMatrixError(ValueError):
    """Raised for matrices with non-finite entries."""


def materialization_cap() -> int:
    return _cap


def set_materialization_cap(cap: int) -> int:
    """Set the dense materialization cap, returning the previous value."""
    global _cap
    if cap < 1:
        raise ValueError("cap must be positive")
    old, _cap = _cap, int(cap)
    return old


def check_cap(dim: int, what: str = "matrix") -> None:
    if dim > _cap:
        raise MaterializationError(
            f"materialization too large: {what} of dimension {dim} exceeds cap {_cap}"
        )


@dataclass
class StateVector:
    """Amplitudes over a labelled register layout.

    ``layout`` lists ``(label, width)`` pairs, most significant register first.
    """

    amplitudes: np.ndarray
    layout: tuple[tuple[str, int], ...] = field(default_factory=tuple)
    normalized: bool = True

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        n = self.num_qubits
        if self.amplitudes.size != 2**n:
            raise ValueError(f"amplitude count {self.amplitudes.size} is not 2**{n}")
        if not self.layout:
            self.layout = (("q", n),)
        if sum(w for _, w in self.layout) != n:
            raise ValueError("layout widths do not sum to the qubit count")
        if self.normalized and abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-12:
            raise ValueError("state marked normalized has norm != 1")

    @property
    def num_qubits(self) -> int:
        n = int(round(np.log2(self.amplitudes.size))) if self.amplitudes.size else 0
        return n

    def register(self, label: str) -> tuple[int, int]:
        """Return ``(offset, width)`` of the register called ``label``."""
        off = 0
        for name, w in self.layout:
            if name == label:
                return off, w
            off += w
        raise KeyError(label)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per register."""
        return self.amplitudes.reshape([2**w for _, w in self.layout])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _finite(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise InvalidMatrixError("invalid matrix: non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Tensor product with ``a`` as the most significant factor."""
    a, b = _finite(np.atleast_2d(a)), _finite(np.atleast_2d(b))
    check_cap(a.shape[0] * b.shape[0], "kron product")
    return np.kron(a, b)


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def is_antihermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    return m.shape[0] == m.shape[1] and np.max(np.abs(m + m.conj().T), initial=0.0) <= tol


def matexp(m, t: float = 1.0) -> np.ndarray:
    """Return ``exp(m * t)``.

    (Anti-)Hermitian generators go through an eigendecomposition, which keeps the
    result exactly (anti-)structured; anything else uses scaling and squaring.
    """
    m = _finite(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matexp needs a square matrix")
    if is_antihermitian(m):
        lam, v = np.linalg.eigh(-1j * m)
        return (v * np.exp(1j * lam * t)) @ v.conj().T
    if is_hermitian(m):
        lam, v = np.linalg.eigh(m)
        return (v * np.exp(lam * t)) @ v.conj().T
    return scipy.linalg.expm(m * t)


def spectral_norm(m, rtol: float = 1e-8, max_iter: int = 20000) -> float:
    """Largest singular value by power iteration on ``m^H m``.

    The start vector is deterministic. Near-degenerate spectra that refuse to
    converge fall back to a dense SVD.
    """
    m = _finite(m)
    if m.size == 0:
        return 0.0
    n = m.shape[1]
    v = np.ones(n, dtype=complex) + 1j * np.linspace(0.0, 1.0, n) / (n + 1)
    v /= np.linalg.norm(v)
    prev, prev_step = None, None
    for _ in range(max_iter):
        w = m.conj().T @ (m @ v)
        lam = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if prev is not None:
            step = abs(lam - prev)
            if step == 0.0:
                return float(np.sqrt(max(lam, 0.0)))
            if prev_step:
                r = min(step / prev_step, 0.999999)
                # Rayleigh quotients increase geometrically; bound the remaining tail.
                if step * r / (1.0 - r) <= rtol * lam:
                    return float(np.sqrt(max(lam, 0.0)))
            prev_step = step
        prev = lam
    return float(np.linalg.svd(m, compute_uv=False)[0])


def unitarity_defect(u: np.ndarray) -> float:
    """``max |U^H U - I|``."""
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

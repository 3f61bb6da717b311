"""Finite-difference operators and assembly of PDE generators as block-encodings.

System register order is axis 0 first (most significant). Boundary handling is
folded into the difference matrices:

* ``D-`` (acts on the primal field) reads a ghost left of index 0. Dirichlet on
  the left gives a zero ghost, so row 0 is ``u_0/h``; Neumann copies ``u_0`` and
  row 0 vanishes.
* ``D+`` (acts on the flux) reads a ghost right of index ``N-1``. Neumann on the
  right gives a zero flux ghost, so the last row is ``-v_{N-1}/h``; Dirichlet
  copies ``v_{N-1}`` and the last row vanishes.
* Periodic axes wrap.

With Dirichlet-left/Neumann-right, or periodic axes, ``(D+)^dag = -D-`` exactly.
For ``N = 4``, Dirichlet-left/Neumann-right and ``h = 1/3``::

    D+ = 3 * [[-1, 1, 0, 0],     D- = 3 * [[ 1, 0, 0, 0],
              [0, -1, 1, 0],               [-1, 1, 0, 0],
              [0, 0, -1, 1],               [0, -1, 1, 0],
              [0, 0, 0, -1]]               [0, 0, -1, 1]]
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import becalc as bc
from . import statevec as sv
from .linalg import StateVector, check_cap, spectral_norm

BCS = ("periodic", "dirichlet", "neumann")


@dataclass(frozen=True)
class GridSpec:
    """Grid with ``2**n[mu]`` points per axis and per-side boundary conditions.

    ``bc[mu] = (left, right)``; periodic axes must be periodic on both sides.
    """

    n: tuple[int, ...]
    bc: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        bc_ = tuple(tuple(s.lower() for s in b) for b in (self.bc or (("periodic", "periodic"),) * len(n)))
        if len(bc_) != len(n):
            raise ValueError("one boundary pair per axis is required")
        for left, right in bc_:
            if left not in BCS or right not in BCS:
                raise ValueError(f"unknown boundary condition {left}/{right}")
            if (left == "periodic") != (right == "periodic"):
                raise ValueError("periodic boundaries must be periodic on both sides")
        if any(v < 1 for v in n):
            raise ValueError("each axis needs at least one qubit")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "bc", bc_)

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(1.0 / (2**v - 1) for v in self.n)

    @property
    def qubits(self) -> int:
        return sum(self.n)

    @property
    def N(self) -> int:
        return 2**self.qubits

    def axis_qubits(self, axis: int) -> tuple[int, ...]:
        off = sum(self.n[:axis])
        return tuple(range(off, off + self.n[axis]))

    def points(self, axis: int) -> np.ndarray:
        return np.arange(2 ** self.n[axis]) / (2 ** self.n[axis] - 1)

    @classmethod
    def wave_demo(cls, n: int | Sequence[int]) -> "GridSpec":
        """Dirichlet left / Neumann right in x, periodic in y."""
        nx, ny = (n, n) if np.isscalar(n) else tuple(n)
        return cls((nx, ny), (("dirichlet", "neumann"), ("periodic", "periodic")))

    @classmethod
    def periodic(cls, n: Sequence[int]) -> "GridSpec":
        return cls(tuple(n), (("periodic", "periodic"),) * len(tuple(n)))


def diff_matrix_1d(N: int, h: float, direction: str, bc: tuple[str, str]) -> np.ndarray:
    left, right = bc
    I = np.eye(N)
    if direction == "+":
        m = np.roll(I, 1, axis=1) - I  # (v_{i+1} - v_i)
        if left != "periodic":
            m[N - 1, 0] = 0.0
            if right == "dirichlet":
                m[N - 1, N - 1] = 0.0
    elif direction == "-":
        m = I - np.roll(I, -1, axis=1)  # (u_i - u_{i-1})
        if left != "periodic":
            m[0, N - 1] = 0.0
            if left == "neumann":
                m[0, 0] = 0.0
    else:
        raise ValueError("direction must be '+' or '-'")
    return m / h


def diff_matrix(axis: int, direction: str, grid: GridSpec) -> np.ndarray:
    """Dense difference operator on the full system register."""
    check_cap(grid.N, "difference operator")
    m = np.ones((1, 1))
    for mu in range(grid.d):
        N = 2 ** grid.n[mu]
        f = diff_matrix_1d(N, grid.h[mu], direction, grid.bc[mu]) if mu == axis else np.eye(N)
        m = np.kron(m, f)
    return m.astype(complex)


def diff_gate_cost(n_axis: int) -> int:
    """Stand-in two-qubit cost of a controlled incrementer on ``n_axis`` qubits."""
    return sum(bc.mcx_gates(c + 1) for c in range(n_axis))


def diff_norm(axis: int, direction: str, grid: GridSpec) -> float:
    N = 2 ** grid.n[axis]
    return spectral_norm(diff_matrix_1d(N, grid.h[axis], direction, grid.bc[axis]))


def common_alpha_D(grid: GridSpec) -> float:
    """Shared sub-normalization for every difference encoding of ``grid``."""
    return max(diff_norm(mu, s, grid) for mu in range(grid.d) for s in "+-") * (1 + 1e-6)


def diff_be(axis: int, direction: str, grid: GridSpec, backend: str = "dilation",
            alpha: float | None = None, extra_sys: int = 0) -> bc.BlockEncoding:
    """Block-encoding of ``D_axis^direction``.

    ``shift_lcu`` combines a cyclic shift and the identity (periodic axes only,
    ``alpha = 2/h``); ``dilation`` embeds the 1-D stencil in a one-ancilla unitary.
    ``extra_sys`` leading system qubits (design registers) are left untouched.
    """
    if direction not in "+-" or len(direction) != 1:
        raise ValueError("direction must be '+' or '-'")
    n_ax = grid.n[axis]
    h = grid.h[axis]
    label = f"D{direction}"
    total = extra_sys + grid.qubits
    qubits = tuple(extra_sys + q for q in grid.axis_qubits(axis))
    if backend == "shift_lcu":
        if grid.bc[axis][0] != "periodic":
            raise ValueError("shift_lcu backend needs a periodic axis")
        shift = -1 if direction == "+" else 1
        S = bc.BlockEncoding(1, 0, 0, n_ax, sv.CyclicShift(n_ax, shift), {}, 0, "S",
                             reference=lambda: np.roll(np.eye(2**n_ax), shift, axis=0).astype(complex))
        I = bc.identity_be(n_ax)
        y = [1 / h, -1 / h] if direction == "+" else [-1 / h, 1 / h]
        enc = bc.lcu(y, [S, I], label)
        if alpha is not None and abs(alpha - enc.alpha) > 1e-12 * alpha:
            raise ValueError("shift_lcu fixes alpha = 2/h")
        U1 = enc.replace(counters={label: 1}, gate_count=diff_gate_cost(n_ax))
    elif backend == "dilation":
        N = 2**n_ax
        m1 = diff_matrix_1d(N, h, direction, grid.bc[axis])
        a = alpha if alpha is not None else spectral_norm(m1) * (1 + 1e-6)
        U1 = bc.dilation_be(m1, a, label, counters={label: 1}, gate_count=diff_gate_cost(n_ax))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return bc.lift(U1, total, qubits)


# --- coefficient sets ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoefficientSet2nd:
    inv_sqrt_rho: bc.BlockEncoding
    sqrt_kappa: bc.BlockEncoding
    zeta: bc.BlockEncoding
    sqrt_gamma: bc.BlockEncoding


@dataclass(frozen=True, eq=False)
class CoefficientSet1st:
    kappa: bc.BlockEncoding
    beta_plus: tuple[bc.BlockEncoding, ...]
    beta_minus: tuple[bc.BlockEncoding, ...]
    gamma: bc.BlockEncoding


def split_beta(beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    beta = np.asarray(beta, dtype=float)
    return np.maximum(beta, 0.0), np.minimum(beta, 0.0)


def _design_qubits(encs: Sequence[bc.BlockEncoding], grid: GridSpec) -> int:
    sizes = {U.sys_qubits for U in encs}
    if len(sizes) != 1:
        raise ValueError("inconsistent design register layouts")
    m = sizes.pop() - grid.qubits
    if m < 0:
        raise ValueError("coefficient encodings are smaller than the grid")
    return m


def _diffs(grid: GridSpec, m: int, backend: str):
    alpha = common_alpha_D(grid) if backend == "dilation" else None
    plus = [diff_be(mu, "+", grid, _backend_for(grid, mu, backend), alpha, m) for mu in range(grid.d)]
    minus = [diff_be(mu, "-", grid, _backend_for(grid, mu, backend), alpha, m) for mu in range(grid.d)]
    return plus, minus


def _backend_for(grid: GridSpec, mu: int, backend: str) -> str:
    if backend == "auto":
        return "shift_lcu" if all(b[0] == "periodic" for b in grid.bc) else "dilation"
    return backend


def assemble_A2nd(coeffs: CoefficientSet2nd, grid: GridSpec, backend: str = "dilation"
                  ) -> bc.BlockEncoding:
    """Encoding of the second-order generator over ``anc | sel | [design] | sys``.

    Terms (selector width ``ceil(log2(d+2))``):
    ``+|0><0| C_rho^-1 C_zeta``; ``-M_{mu+1}(C_rho^-1/2 D+ C_kappa^1/2,
    C_kappa^1/2 D- C_rho^-1/2)``; ``+(|0><d+1| - |d+1><0|) C_rho^-1/2 C_gamma^1/2``.
    ``C_rho^-1`` is the product of the ``C_rho^-1/2`` encoding with its adjoint.
    """
    d = grid.d
    R, K, Z, G = coeffs.inv_sqrt_rho, coeffs.sqrt_kappa, coeffs.zeta, coeffs.sqrt_gamma
    m = _design_qubits([R, K, Z, G], grid)
    plus, minus = _diffs(grid, m, backend)
    k = bc.ceil_log2(d + 2)
    terms = [bc.selector_diag(0, bc.product(bc.adjoint(R), R, Z), k)]
    for mu in range(d):
        terms.append(bc.selector_offdiag(mu + 1, bc.product(R, plus[mu], K),
                                         bc.product(K, minus[mu], R), k))
    terms.append(bc.selector_offdiag_shared(d + 1, bc.product(R, G), k, phase=-1))
    y = [1] + [-1] * d + [1]
    return bc.lcu(y, terms, "A2nd")


def assemble_A1st(coeffs: CoefficientSet1st, grid: GridSpec, backend: str = "dilation"
                  ) -> bc.BlockEncoding:
    """Encoding of ``-(1/2 sum (D+ C_k D- + D- C_k D+) + sum (C_b+ D- + C_b- D+) + C_g)``.

    Term order per axis: ``D+ C_k D-``, ``D- C_k D+``, ``C_b+ D-``, ``C_b- D+``; then
    ``C_g``. Coefficients ``-1/2, -1/2, -1, -1`` per axis and ``-1``.
    """
    d = grid.d
    Kp = coeffs.kappa
    if len(coeffs.beta_plus) != d or len(coeffs.beta_minus) != d:
        raise ValueError("need one beta split per axis")
    m = _design_qubits([Kp, coeffs.gamma, *coeffs.beta_plus, *coeffs.beta_minus], grid)
    plus, minus = _diffs(grid, m, backend)
    terms, y = [], []
    for mu in range(d):
        terms += [bc.product(plus[mu], Kp, minus[mu]), bc.product(minus[mu], Kp, plus[mu]),
                  bc.product(coeffs.beta_plus[mu], minus[mu]),
                  bc.product(coeffs.beta_minus[mu], plus[mu])]
        y += [-0.5, -0.5, -1, -1]
    terms.append(coeffs.gamma)
    y.append(-1)
    return bc.lcu(y, terms, "A1st")


def assemble_wave_A(C_be: bc.BlockEncoding, grid: GridSpec, backend: str = "dilation"
                    ) -> bc.BlockEncoding:
    """Acoustic generator ``-(M_1 + M_2)`` with ``M_j = |0><j| C D_j+ + |j><0| D_j- C``.

    System layout ``sel(2) | [design] | x | y``; selector value 3 is an all-zero block.
    """
    if grid.d != 2:
        raise ValueError("the wave generator is two-dimensional")
    m = _design_qubits([C_be], grid)
    plus, minus = _diffs(grid, m, backend)
    Ms = [bc.selector_offdiag(mu + 1, bc.product(C_be, plus[mu]), bc.product(minus[mu], C_be), 2)
          for mu in range(2)]
    return bc.lcu([-1, -1], Ms, "A_wave")


def assemble_param(kind: str, coeffs, grid: GridSpec, backend: str = "dilation") -> bc.BlockEncoding:
    """Parameterized assembly ``sum_xi |xi><xi| (x) A(xi)``.

    Every diagonal input must carry the same design register in front of the grid;
    difference operators and selectors never touch it.
    """
    builders = {"A2nd": assemble_A2nd, "A1st": assemble_A1st, "wave": assemble_wave_A}
    if kind not in builders:
        raise ValueError(f"unknown generator kind {kind!r}")
    return builders[kind](coeffs, grid, backend)


# --- dense oracles -------------------------------------------------------------------

def dense_A2nd(inv_sqrt_rho, sqrt_kappa, zeta, sqrt_gamma, grid: GridSpec) -> np.ndarray:
    """Dense second-order generator from diagonal value arrays."""
    d = grid.d
    k = bc.ceil_log2(d + 2)
    N = grid.N
    check_cap(2**k * N, "dense generator")
    R, K, Z, G = (np.diag(np.asarray(v, dtype=complex)) for v in (inv_sqrt_rho, sqrt_kappa, zeta, sqrt_gamma))
    A = np.zeros((2**k * N,) * 2, dtype=complex)
    blk = lambda i, j: (slice(i * N, (i + 1) * N), slice(j * N, (j + 1) * N))
    A[blk(0, 0)] += R @ R @ Z
    for mu in range(d):
        A[blk(0, mu + 1)] -= R @ diff_matrix(mu, "+", grid) @ K
        A[blk(mu + 1, 0)] -= K @ diff_matrix(mu, "-", grid) @ R
    A[blk(0, d + 1)] += R @ G
    A[blk(d + 1, 0)] -= R @ G
    return A


def dense_A1st(kappa, beta, gamma, grid: GridSpec) -> np.ndarray:
    """Dense first-order generator; ``beta`` lists one value array per axis."""
    Kp = np.diag(np.asarray(kappa, dtype=complex))
    A = -np.diag(np.asarray(gamma, dtype=complex))
    for mu in range(grid.d):
        bp, bm = split_beta(beta[mu])
        Dp, Dm = diff_matrix(mu, "+", grid), diff_matrix(mu, "-", grid)
        A -= 0.5 * (Dp @ Kp @ Dm + Dm @ Kp @ Dp)
        A -= np.diag(bp) @ Dm + np.diag(bm) @ Dp
    return A


def dense_wave_A(c_values, grid: GridSpec) -> np.ndarray:
    """Dense acoustic generator over ``sel(2) | x | y`` from the values of ``c``."""
    N = grid.N
    check_cap(4 * N, "dense generator")
    C = np.diag(np.asarray(c_values, dtype=complex).ravel())
    A = np.zeros((4 * N, 4 * N), dtype=complex)
    for mu in range(2):
        j = mu + 1
        A[0:N, j * N:(j + 1) * N] = -C @ diff_matrix(mu, "+", grid)
        A[j * N:(j + 1) * N, 0:N] = -diff_matrix(mu, "-", grid) @ C
    return A


# --- initial state -------------------------------------------------------------------

def initial_circuit(grid: GridSpec) -> sv.ActionNode:
    """X on the high x bits, H on the lowest x bit and on every y bit; selector untouched."""
    if grid.d != 2:
        raise ValueError("initial state is defined for the 2-D wave layout")
    nx, ny = grid.n
    nq = 2 + nx + ny
    X = sv.DenseUnitary(np.array([[0, 1], [1, 0]]))
    H = sv.DenseUnitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    gates = [sv.embed(X, nq, (2 + q,)) for q in range(nx - 1)]
    gates += [sv.embed(H, nq, (2 + nx - 1,))]
    gates += [sv.embed(H, nq, (2 + nx + q,)) for q in range(ny)]
    return sv.compose(*gates)


def prepare_initial(grid: GridSpec) -> StateVector:
    """``w_1`` uniform on the two rightmost x columns, every other component zero."""
    if grid.d != 2:
        raise ValueError("initial state is defined for the 2-D wave layout")
    nx, ny = grid.n
    psi = np.zeros(2 ** (2 + nx + ny), dtype=complex)
    psi[0] = 1.0
    out = initial_circuit(grid).apply(psi[None, :])[0]
    return StateVector(out, (("sel", 2), ("x", nx), ("y", ny)))

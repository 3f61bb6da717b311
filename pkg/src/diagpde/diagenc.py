"""Diagonal block-encodings of spatially varying coefficients.

Coefficients are approximated by truncated Fourier series
``f^F(x, y) = sum_{k,l} c_{k,l} exp(i pi k x) exp(i pi l y)`` on the unit square and
encoded with a prepare/phase/unprepare LCU. Grid points are ``x_j = j / (2**n - 1)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import statevec as sv
from .becalc import (GATES_PER_TOFFOLI, BlockEncoding, StatePreparationPair, _ctrl_counters,
                     _prep_gates, _x_node, and_ladder_toffolis, ceil_log2, lcu, merge_counters)


@dataclass(frozen=True)
class DiagonalSpec:
    """Qubits ``n`` of one spatial axis with grid map ``x_j = j/(2**n - 1)``."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("an axis needs at least one qubit")

    @property
    def points(self) -> np.ndarray:
        return np.arange(2**self.n) / (2**self.n - 1)


def _specs(spec, dims: int) -> tuple[DiagonalSpec, ...]:
    if isinstance(spec, DiagonalSpec):
        spec = (spec,)
    elif isinstance(spec, int):
        spec = (spec,) * dims
    out = tuple(s if isinstance(s, DiagonalSpec) else DiagonalSpec(int(s)) for s in spec)
    if len(out) != dims:
        raise ValueError(f"need {dims} axis specs, got {len(out)}")
    return out


def fold(u: np.ndarray) -> np.ndarray:
    """Map ``u`` into ``[0, 1]`` by the period-2 even extension."""
    r = np.mod(np.asarray(u, dtype=float), 2.0)
    return np.where(r > 1.0, 2.0 - r, r)


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Truncated Fourier series on the unit square (``coeffs[k + Kx, l + Ky]``)."""

    coeffs: np.ndarray
    dims: int = 2
    residual: float = 0.0
    target: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        if self.dims == 1 and c.shape[0] == 1 and c.shape[1] > 1:
            c = c.T
        if c.shape[0] % 2 == 0 or c.shape[1] % 2 == 0:
            raise ValueError("coefficient array must have odd extents (2K+1)")
        if self.dims not in (1, 2) or (self.dims == 1 and c.shape[1] != 1):
            raise ValueError("bad dimensionality for coefficient array")
        object.__setattr__(self, "coeffs", c)

    @property
    def degrees(self) -> tuple[int, int]:
        return (self.coeffs.shape[0] - 1) // 2, (self.coeffs.shape[1] - 1) // 2

    @property
    def l1(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def coeff(self, k: int, l: int = 0) -> complex:
        kx, ky = self.degrees
        return complex(self.coeffs[k + kx, l + ky])

    def _basis(self, pts, K):
        return np.exp(1j * np.pi * np.outer(np.asarray(pts, dtype=float), np.arange(-K, K + 1)))

    def grid_values(self, xs, ys=None) -> np.ndarray:
        """Series on the tensor grid ``xs x ys``; shape ``(len(xs), len(ys))`` (or 1-D)."""
        kx, ky = self.degrees
        ex = self._basis(np.atleast_1d(xs), kx)
        if self.dims == 1:
            return ex @ self.coeffs[:, 0]
        ey = self._basis(np.atleast_1d(ys), ky)
        return ex @ self.coeffs @ ey.T

    def __call__(self, x, y=None):
        """Pointwise evaluation (broadcasting ``x`` against ``y``)."""
        kx, ky = self.degrees
        x = np.asarray(x, dtype=float)
        out = np.zeros(np.broadcast(x, x if y is None else np.asarray(y)).shape, dtype=complex)
        for a in range(2 * kx + 1):
            ex = np.exp(1j * np.pi * (a - kx) * x)
            if self.dims == 1:
                out = out + self.coeffs[a, 0] * ex
                continue
            for b in range(2 * ky + 1):
                if self.coeffs[a, b] != 0:
                    out = out + self.coeffs[a, b] * ex * np.exp(1j * np.pi * (b - ky) * np.asarray(y))
        return out

    def target_grid(self, xs, ys=None) -> np.ndarray | None:
        """Fitted function on the grid, with the even period-2 extension applied."""
        if self.target is None:
            return None
        if self.dims == 1:
            return np.asarray(self.target(fold(xs)), dtype=complex)
        X, Y = np.meshgrid(fold(xs), fold(ys), indexing="ij")
        return np.asarray(self.target(X, Y), dtype=complex)


def fit_fourier(f: Callable, degrees, quad_points: int | None = None, dims: int | None = None
                ) -> FourierSeries:
    """Fourier coefficients of ``f`` by trapezoidal quadrature of its even extension.

    ``degrees`` is ``K`` (1-D) or ``(Kx, Ky)``. The residual stored on the result is
    the sup-norm error over a grid four times finer than the quadrature grid.
    """
    if np.isscalar(degrees):
        degrees = (int(degrees),)
    degrees = tuple(int(k) for k in degrees)
    dims = dims or len(degrees)
    if dims == 2 and len(degrees) == 1:
        degrees = degrees * 2
    if dims == 1:
        degrees = (degrees[0], 0)
    if min(degrees) < 0:
        raise ValueError("degrees must be non-negative")
    kmax = max(degrees)
    if quad_points is None:
        quad_points = max(256, 8 * kmax + 8)
    if quad_points < 4 * kmax + 4:
        raise ValueError("quad_points must be >= 4*max(K)+4")
    q = quad_points
    t = -1.0 + 2.0 * np.arange(q) / q
    g1 = fold(t)
    if dims == 1:
        samples = np.asarray(f(g1), dtype=complex)
    else:
        X, Y = np.meshgrid(g1, g1, indexing="ij")
        samples = np.asarray(f(X, Y), dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise ValueError("non-finite samples")
    kx, ky = degrees
    ex = np.exp(-1j * np.pi * np.outer(np.arange(-kx, kx + 1), t)) / q
    if dims == 1:
        coeffs = (ex @ samples)[:, None]
    else:
        ey = np.exp(-1j * np.pi * np.outer(np.arange(-ky, ky + 1), t)) / q
        coeffs = ex @ samples @ ey.T
    # Exact symmetry of the quadrature leaves round-off imaginary parts for real f.
    if np.isrealobj(samples) or np.max(np.abs(samples.imag)) == 0:
        coeffs = coeffs.real.astype(complex)
    coeffs[np.abs(coeffs) < 1e-15 * max(1.0, np.abs(coeffs).max())] = 0.0
    series = FourierSeries(coeffs, dims, 0.0, f)
    fine = np.linspace(0.0, 1.0, 2 * q + 1)
    if dims == 1:
        err = np.abs(series.grid_values(fine) - np.asarray(f(fine)))
    else:
        X, Y = np.meshgrid(fine, fine, indexing="ij")
        err = np.abs(series.grid_values(fine, fine) - np.asarray(f(X, Y)))
    return FourierSeries(coeffs, dims, float(err.max()), f)


def _axis_phase(K: int, p: int, pts: np.ndarray) -> np.ndarray:
    """Angles ``pi (mu - K) x`` over ``(prep value mu, grid point)``."""
    mu = np.arange(2**p)
    return np.pi * np.outer(mu - K, pts)


@dataclass(frozen=True)
class _Shift:
    m: int
    lo: float = 0.0
    hi: float = 1.0

    @property
    def values(self) -> np.ndarray:
        if self.m == 0:
            return np.zeros(1)
        return self.lo + (self.hi - self.lo) * np.arange(2**self.m) / (2**self.m - 1)


def _fourier_be(s: FourierSeries, specs, shifts, direction: float, label: str) -> BlockEncoding:
    kx, ky = s.degrees
    px = ceil_log2(2 * kx + 1)
    py = ceil_log2(2 * ky + 1) if s.dims == 2 else 0
    p = px + py
    lam = np.zeros((2**px, 2**py), dtype=complex)
    lam[: 2 * kx + 1, : 2 * ky + 1] = s.coeffs
    flat = lam.ravel()
    alpha = float(np.abs(flat).sum())
    if alpha == 0:
        raise ValueError("series has zero l1 norm")
    prep = StatePreparationPair.build(list(flat))
    axes = [(kx, px, specs[0], shifts[0])]
    if s.dims == 2:
        axes.append((ky, py, specs[1], shifts[1]))
    m_tot = sum(sh.m for *_, sh in axes)
    n_tot = sum(sp.n for _, _, sp, _ in axes)
    nq = p + m_tot + n_tot

    def angles():
        # Register order: prep_x | prep_y | design_x | design_y | sys_x | sys_y.
        parts = []
        for K, pa, sp, sh in axes:
            theta = _axis_phase(K, pa, sp.points)  # (mu, x)
            shift = np.pi * np.outer(np.arange(2**pa) - K, direction * sh.values)  # (mu, xi)
            parts.append(theta[:, None, :] + shift[:, :, None])  # (mu, xi, x)
        if len(parts) == 1:
            return parts[0].ravel()
        a, b = parts
        tot = (a[:, None, :, None, :, None] + b[None, :, None, :, None, :])
        return tot.ravel()

    prep_q = tuple(range(p))
    action = sv.compose(
        sv.embed(sv.DenseUnitary(prep.prep_right), nq, prep_q),
        sv.PhaseDiag(nq, angles),
        sv.embed(sv.Adjoint(sv.DenseUnitary(prep.prep_left)), nq, prep_q),
    )

    def series_values():
        pts = [(sp.points[None, :] + direction * sh.values[:, None]) for _, _, sp, sh in axes]
        if s.dims == 1:
            return s.grid_values(pts[0].ravel()).ravel()
        # (xi_x, x) and (xi_y, y) grids -> order xi_x, xi_y, x, y
        vx = s._basis(pts[0].ravel(), kx) @ s.coeffs  # (xi_x*x, ly)
        ey = s._basis(pts[1].ravel(), ky)  # (xi_y*y, ly)
        v = vx @ ey.T
        mx, my = axes[0][3].values.size, axes[1][3].values.size
        nxp, nyp = axes[0][2].points.size, axes[1][2].points.size
        return v.reshape(mx, nxp, my, nyp).transpose(0, 2, 1, 3).ravel()

    vals_cache: dict = {}

    def vals():
        if "v" not in vals_cache:
            vals_cache["v"] = series_values()
        return vals_cache["v"]

    def target_values():
        if s.target is None:
            return vals()
        pts = [fold(sp.points[None, :] + direction * sh.values[:, None]) for _, _, sp, sh in axes]
        if s.dims == 1:
            return np.asarray(s.target(pts[0].ravel()), dtype=complex)
        X, Y = np.broadcast_arrays(pts[0][:, None, :, None], pts[1][None, :, None, :])
        return np.asarray(s.target(X, Y), dtype=complex).ravel()

    grid_dev = 0.0
    if s.target is not None and 2 ** (m_tot + n_tot) <= 2**22:
        grid_dev = float(np.max(np.abs(target_values() - vals())))
    eps = max(float(s.residual), grid_dev) if s.target is not None else 0.0

    gates = (_prep_gates(prep.prep_left[:, 0]) + _prep_gates(prep.prep_right[:, 0])
             + sum(pa * (sp.n + sh.m) for _, pa, sp, sh in axes))
    return BlockEncoding(
        alpha, p, eps, m_tot + n_tot, action, {label: 1}, gates, label,
        reference=lambda: np.diag(target_values()),
        fast=lambda x: x * (vals() / alpha),
        fast_adj=lambda x: x * (vals().conj() / alpha),
    )


def diag_be_fourier(s: FourierSeries, spec, label: str = "U_f") -> BlockEncoding:
    """Diagonal encoding of ``diag(f^F(x_j, y_l))`` over the system ``x | y``.

    Ancillas: one prepare register of ``ceil(log2(2K+1))`` qubits per axis. The
    attached reference is the fitted function itself and ``eps`` bounds the
    truncation error on the grid.
    """
    specs = _specs(spec, s.dims)
    return _fourier_be(s, specs, [_Shift(0)] * s.dims, 0.0, label)


def param_diag_be_shift(s: FourierSeries, spec, m, ranges=None, direction: float = 1.0,
                        label: str = "U_f(xi)") -> BlockEncoding:
    """Encoding of ``sum_xi |xi><xi| (x) diag(f^F(x + direction * xi))``.

    ``m`` gives design qubits per axis (0 leaves an axis unshifted) and ``ranges``
    the affine value map of each design register (default ``[0, 1]``). The shift
    enters only as extra phases, so no ancilla is added. System layout is
    ``xi_x | xi_y | x | y``.
    """
    specs = _specs(spec, s.dims)
    ms = (m,) * s.dims if np.isscalar(m) else tuple(m)
    ranges = ranges or [(0.0, 1.0)] * s.dims
    shifts = [_Shift(int(mi), float(lo), float(hi)) for mi, (lo, hi) in zip(ms, ranges)]
    if any(sh.m < 0 for sh in shifts):
        raise ValueError("design qubits must be non-negative")
    return _fourier_be(s, specs, shifts, float(direction), label)


def diag_be_register_value(m: int, lo: float = 0.0, hi: float = 1.0,
                           label: str = "U_xi") -> BlockEncoding:
    """Exact encoding of ``sum_xi v(xi) |xi><xi|`` with ``v`` affine in the register value.

    Built as ``W = U^dag (Z (x) I) U`` where ``U`` loads ``p(xi) = (1 + v)/2`` into
    one ancilla, so ``<0|W|0> = 2p - 1 = v``.
    """
    if not hi > lo:
        raise ValueError("need hi > lo")
    if abs(lo) > 1 or abs(hi) > 1:
        raise ValueError("value range outside [-1, 1]")
    if m < 1:
        raise ValueError("need m >= 1")
    v = lo + (hi - lo) * np.arange(2**m) / (2**m - 1)
    prob = (1 + v) / 2
    c, s_ = np.sqrt(prob), np.sqrt(1 - prob)
    load = sv.Multiplexed2x2(m + 1, (c, -s_, s_, c))
    z = sv.SignDiag(m + 1, np.repeat([False, True], 2**m))
    action = sv.compose(load, z, sv.Adjoint(load))
    return BlockEncoding(1.0, 1, 0.0, m, action, {label: 1}, 2 * m * 2, label,
                         reference=lambda: np.diag(v).astype(complex),
                         fast=lambda x: x * v, fast_adj=lambda x: x * v)


# --- comparator and piecewise encodings ----------------------------------------------

@dataclass(frozen=True, eq=False)
class Comparator:
    """Ripple-carry comparator ``|flag>|x>|xi> -> |flag ^ [x >= xi]>|x>|xi>``.

    ``node`` acts on ``flag | x | xi`` and borrows ``work`` clean qubits
    (carry plus zero padding when ``n != m``).
    """

    n: int
    m: int
    node: sv.ActionNode
    work: int
    toffolis: int

    @property
    def num_qubits(self) -> int:
        return 1 + self.n + self.m


def _ripple_compare(a, b, c, f, w: int):
    """Run the comparator gate list on bit arrays (LSB first); returns final bits and Toffolis.

    MAJ gates ripple the carry of ``x + ~xi + 1`` into the top ``x`` bit, a CNOT
    copies it to the flag, and the inverse MAJ gates restore every register.
    """
    a = list(a)
    b = [1 - bi for bi in b]  # X on the threshold register
    c = 1 - c  # carry-in 1
    tof = 0

    def put(i, v):
        nonlocal c
        if i == 0:
            c = v
        else:
            a[i - 1] = v

    for i in range(w):
        ci = c if i == 0 else a[i - 1]
        b[i] = b[i] ^ a[i]
        ci = ci ^ a[i]
        a[i] = a[i] ^ (ci & b[i])
        tof += 1
        put(i, ci)
    f = f ^ a[w - 1]
    for i in reversed(range(w)):
        ci = c if i == 0 else a[i - 1]
        a[i] = a[i] ^ (ci & b[i])
        tof += 1
        ci = ci ^ a[i]
        b[i] = b[i] ^ a[i]
        put(i, ci)
    return f, a, [1 - bi for bi in b], 1 - c, tof


def comparator_flag(n: int, m: int) -> Comparator:
    """Inclusive comparator ``[x >= xi]`` on integer register values.

    Uses ``2 * max(n, m)`` Toffolis; the gate list is simulated classically on every
    basis state to build the exact permutation.
    """
    if n < 1 or m < 1:
        raise ValueError("registers need at least one qubit")
    w = max(n, m)
    work = 1 + (w - n) + (w - m)
    tot = work + 1 + n + m
    idx = np.arange(2**tot, dtype=np.int64)
    # layout: carry | pad_x | pad_xi | flag | x | xi
    xi = idx & (2**m - 1)
    x = (idx >> m) & (2**n - 1)
    f = (idx >> (m + n)) & 1
    pad_xi = (idx >> (m + n + 1)) & (2 ** (w - m) - 1)
    pad_x = (idx >> (m + n + 1 + w - m)) & (2 ** (w - n) - 1)
    carry = (idx >> (tot - 1)) & 1
    xa = x | (pad_x << n)
    xb = xi | (pad_xi << m)
    a_bits = [(xa >> i) & 1 for i in range(w)]
    b_bits = [(xb >> i) & 1 for i in range(w)]
    flag, a_out, b_out, c_out, tof = _ripple_compare(a_bits, b_bits, carry, f, w)
    xa_out = sum(bit << i for i, bit in enumerate(a_out))
    xb_out = sum(bit << i for i, bit in enumerate(b_out))
    if not (np.array_equal(xa_out, xa) and np.array_equal(xb_out, xb) and np.array_equal(c_out, carry)):
        raise RuntimeError("comparator failed to restore its registers")
    out = (idx & ~np.int64(1 << (m + n))) | (flag << (m + n))
    node = sv.WorkQubits(sv.Permutation(tot, out), work)
    return Comparator(n, m, node, work, tof)


def piecewise_diag_be(pieces: Sequence[FourierSeries], n: int, m: int,
                      patterns: Sequence[int] | None = None, label: str = "U_pw") -> BlockEncoding:
    """Diagonal encoding of a piecewise function with register-held breakpoints.

    ``pieces[k]`` covers ``xi_k <= x < xi_{k+1}`` where ``xi_0 .. xi_{P-2}`` are
    ``m``-qubit threshold registers compared against the ``n``-qubit grid index.
    Piece ``k`` fires on the flag pattern with the first ``k`` flags set; other
    patterns (unsorted thresholds) encode zero. System layout ``xi_0 .. | x``.
    """
    pieces = list(pieces)
    if not pieces:
        raise ValueError("need at least one piece")
    P = len(pieces)
    if any(s.dims != 1 for s in pieces):
        raise ValueError("piecewise encoding is one-dimensional")
    if P == 1:
        return diag_be_fourier(pieces[0], n, label)
    nf = P - 1
    if patterns is None:
        patterns = [((1 << k) - 1) << (nf - k) for k in range(P)]
    patterns = list(patterns)
    if len(set(patterns)) != len(patterns):
        raise ValueError("overlapping flag patterns")
    encs = [diag_be_fourier(s, n, f"{label}[{k}]") for k, s in enumerate(pieces)]
    sys_q = nf * m + n
    cmp_ = comparator_flag(n, m)

    terms = []
    for k, (U, pat) in enumerate(zip(encs, patterns)):
        a = max(U.ancillas, 1)
        # work layout: flags(nf) | anc(a) | thresholds(nf*m) | x(n)
        wq = nf + a + sys_q
        x_q = tuple(range(wq - n, wq))
        comps = [sv.embed(cmp_.node, wq, (i,) + x_q + tuple(range(nf + a + i * m, nf + a + (i + 1) * m)))
                 for i in range(nf)]
        tgt = tuple(range(nf, nf + a)) + x_q
        u = sv.embed(U.action, a + n, tuple(range(a - U.ancillas, a + n)))
        xn = _x_node(a + n)
        children = tuple((v, u if v == pat else xn) for v in range(2**nf))
        body = sv.Select(wq, tuple(range(nf)), tgt, children)
        inner = sv.compose(*comps, body, *reversed(comps))
        action = sv.WorkQubits(inner, nf)
        tof = 2 * nf * cmp_.toffolis + 2 * and_ladder_toffolis(nf)

        def ref(U=U, pat=pat):
            return np.diag(_piece_values(U, pat, nf, n, m))

        terms.append(BlockEncoding(
            U.alpha, a, U.eps, sys_q, action,
            merge_counters(_ctrl_counters(U.counters), {"toffoli": tof}),
            U.gate_count + GATES_PER_TOFFOLI * tof, f"{label}[{k}]", ref))
    return lcu([1.0] * P, terms, label)


def _piece_values(U: BlockEncoding, pat: int, nf: int, n: int, m: int) -> np.ndarray:
    base = np.diag(U.reference_matrix())
    idx = np.arange(2 ** (nf * m + n))
    x = idx & (2**n - 1)
    flags = np.zeros_like(idx)
    for i in range(nf):
        xi = (idx >> (n + (nf - 1 - i) * m)) & (2**m - 1)
        flags |= (x >= xi).astype(np.int64) << (nf - 1 - i)
    return np.where(flags == pat, base[x], 0.0)


# --- truncation degree ---------------------------------------------------------------

@dataclass(frozen=True)
class Analytic:
    """``|f| <= M`` on the strip of half-width ``strip`` around the real axis."""

    M: float
    strip: float


@dataclass(frozen=True)
class Differentiable:
    """``f`` is ``nu`` times differentiable with ``f^(nu)`` of variation ``V``."""

    nu: float
    V: float


def truncation_bound(smoothness, K: int) -> float:
    """Sup-norm truncation bound at degree ``K``.

    Analytic: ``2 M exp(-a K) / (exp(a) - 1)``; differentiable: ``2 V / (pi nu K^nu)``.
    """
    if isinstance(smoothness, Analytic):
        a = smoothness.strip
        return 2 * smoothness.M * math.exp(-a * K) / math.expm1(a)
    if isinstance(smoothness, Differentiable):
        if smoothness.nu < 1:
            raise ValueError("nu must be >= 1")
        if K == 0:
            return math.inf
        return 2 * smoothness.V / (math.pi * smoothness.nu * K**smoothness.nu)
    raise TypeError("unknown smoothness class")


def truncation_degree(smoothness, eps_f: float) -> int:
    """Smallest ``K`` whose truncation bound is at most ``eps_f``."""
    if not eps_f > 0:
        raise ValueError("eps_f must be positive")
    if isinstance(smoothness, Analytic):
        a = smoothness.strip
        K = max(0, math.ceil(math.log(2 * smoothness.M / (math.expm1(a) * eps_f)) / a))
    elif isinstance(smoothness, Differentiable):
        if smoothness.nu < 1:
            raise ValueError("nu must be >= 1")
        nu = smoothness.nu
        K = max(1, math.ceil((2 * smoothness.V / (math.pi * nu * eps_f)) ** (1 / nu)))
    else:
        raise TypeError("unknown smoothness class")
    # guard against floating round-off at the boundary
    while K > 0 and truncation_bound(smoothness, K - 1) <= eps_f:
        K -= 1
    while truncation_bound(smoothness, K) > eps_f:
        K += 1
    return K


# --- CSV serialization ---------------------------------------------------------------

def fourier_to_csv(s: FourierSeries) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "l", "re", "im"])
    kx, ky = s.degrees
    for k in range(-kx, kx + 1):
        for l in range(-ky, ky + 1):
            c = s.coeff(k, l)
            w.writerow([k, l, f"{c.real:.17g}", f"{c.imag:.17g}"])
    return buf.getvalue()


def write_fourier_csv(s: FourierSeries, path) -> None:
    Path(path).write_text(fourier_to_csv(s))


def read_fourier_csv(source, dims: int | None = None) -> FourierSeries:
    """Parse a ``k,l,re,im`` table (path or text)."""
    text = Path(source).read_text() if not (isinstance(source, str) and "\n" in source) else source
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"k", "l", "re", "im"}:
        raise ValueError("expected header k,l,re,im")
    ks = [int(r["k"]) for r in rows]
    ls = [int(r["l"]) for r in rows]
    kx, ky = max(abs(k) for k in ks), max(abs(l) for l in ls)
    c = np.zeros((2 * kx + 1, 2 * ky + 1), dtype=complex)
    for k, l, r in zip(ks, ls, rows):
        c[k + kx, l + ky] = complex(float(r["re"]), float(r["im"]))
    if dims is None:
        dims = 1 if ky == 0 else 2
    return FourierSeries(c, dims)

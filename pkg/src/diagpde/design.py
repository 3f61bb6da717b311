"""Design-parameter studies for the 2-D acoustic demo.

The sound speed is a Gaussian dip whose centre is the design parameter. It is
fitted once around the origin and shifted by the design registers through
``param_diag_be_shift`` (direction -1, so register value ``xi`` is the centre).
The objective is ``G(xi) = sum_{S} w_1(t; xi)^2`` over a target region and
``F = sqrt(G)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import becalc as bc
from . import diagenc as de
from . import hamsim as hs
from . import pdeops as po
from . import statevec as sv
from .linalg import StateVector, matexp

SIGMA_X = 1 / 20
SIGMA_Y = 1 / 5


def gaussian_profile(xi: Sequence[float] | None = None):
    """``c(x, y) = 1 - exp(-((x-xi_x)^2 / (2 sx^2) + (y-xi_y)^2 / (2 sy^2)))``."""
    cx, cy = (0.5, 0.5) if xi is None else (float(xi[0]), float(xi[1]))

    def c(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return 1.0 - np.exp(-((x - cx) ** 2 / (2 * SIGMA_X**2) + (y - cy) ** 2 / (2 * SIGMA_Y**2)))

    return c


@dataclass(frozen=True)
class DesignParam:
    name: str
    m: int
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("a design parameter needs at least one qubit")
        if not self.hi > self.lo:
            raise ValueError("value map must be increasing")

    @property
    def values(self) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * np.arange(2**self.m) / (2**self.m - 1)


@dataclass(frozen=True)
class DesignSpace:
    params: tuple[DesignParam, ...]

    @property
    def qubits(self) -> int:
        return sum(p.m for p in self.params)

    @property
    def size(self) -> int:
        return 2**self.qubits

    def cells(self) -> list[tuple[float, ...]]:
        """Parameter values in register order (first parameter most significant)."""
        grids = np.meshgrid(*[p.values for p in self.params], indexing="ij")
        return [tuple(float(g.ravel()[i]) for g in grids) for i in range(self.size)]

    @classmethod
    def shift2d(cls, m: int | Sequence[int]) -> "DesignSpace":
        mx, my = (m, m) if np.isscalar(m) else tuple(m)
        return cls((DesignParam("xi_x", int(mx)), DesignParam("xi_y", int(my))))


@dataclass(frozen=True)
class TargetRegion:
    """Grid indices ``(ix, iy)`` of the region and the selected component of ``w``."""

    cells: tuple[tuple[int, int], ...]
    component: int = 0

    def __post_init__(self):
        if not self.cells:
            raise ValueError("empty target region")

    def mask(self, grid: po.GridSpec) -> np.ndarray:
        nx, ny = 2 ** grid.n[0], 2 ** grid.n[1]
        m = np.zeros((nx, ny), dtype=bool)
        for ix, iy in self.cells:
            if not (0 <= ix < nx and 0 <= iy < ny):
                raise ValueError("region index outside the grid")
            m[ix, iy] = True
        return m

    @classmethod
    def rectangle(cls, grid: po.GridSpec, xr: tuple[float, float], yr: tuple[float, float],
                  component: int = 0) -> "TargetRegion":
        xs, ys = grid.points(0), grid.points(1)
        tol = 1e-12
        cells = tuple((i, j) for i, x in enumerate(xs) for j, y in enumerate(ys)
                      if xr[0] - tol <= x <= xr[1] + tol and yr[0] - tol <= y <= yr[1] + tol)
        return cls(cells, component)


def component_grid(state: np.ndarray, grid: po.GridSpec, component: int = 0) -> np.ndarray:
    """Component ``component`` of a ``sel(2) | x | y`` state as an ``(Nx, Ny)`` array."""
    nx, ny = 2 ** grid.n[0], 2 ** grid.n[1]
    return np.asarray(state).reshape(4, nx, ny)[component]


def _peak_x(row: np.ndarray, xs: np.ndarray) -> float:
    i = int(np.argmax(row))
    if 0 < i < len(row) - 1:
        a, b, c = row[i - 1], row[i], row[i + 1]
        den = a - 2 * b + c
        if den < 0:
            return float(xs[i] + 0.5 * (a - c) / den * (xs[1] - xs[0]))
    return float(xs[i])


def front_positions(w1: np.ndarray, grid: po.GridSpec) -> np.ndarray:
    """Distance travelled by the pulse in each y row.

    The pulse is located at the (parabolically refined) peak of ``Re w_1`` and
    measured from the centroid of the initial stripe.
    """
    xs = grid.points(0)
    w0 = component_grid(po.prepare_initial(grid).amplitudes, grid).real
    p0 = w0.sum(axis=1)
    x0 = float((xs * p0).sum() / p0.sum())
    w = np.asarray(w1).real
    return np.array([x0 - _peak_x(w[:, j], xs) for j in range(w.shape[1])])


def front_lag_in_middle(w1: np.ndarray, grid: po.GridSpec) -> tuple[bool, int]:
    """Whether the shortest travel distance over y occurs in the middle third of y."""
    pos = front_positions(w1, grid)
    ys = grid.points(1)
    iy = int(np.argmin(pos))
    return bool(1 / 3 - 1e-12 <= ys[iy] <= 2 / 3 + 1e-12), iy


# --- forward pipeline ----------------------------------------------------------------

@dataclass
class ForwardModel:
    """Fixed-coefficient forward problem with the default Gaussian centre."""

    grid: po.GridSpec
    K: int = 3
    t: float = 1.0
    eps_hs: float = 1e-6
    backend: str = "dilation"
    profile: object = None

    @cached_property
    def series(self) -> de.FourierSeries:
        return de.fit_fourier(self.profile or gaussian_profile(), (self.K, self.K))

    @cached_property
    def c_be(self) -> bc.BlockEncoding:
        return de.diag_be_fourier(self.series, self.grid.n, "U_c")

    @cached_property
    def generator(self) -> bc.BlockEncoding:
        return po.assemble_wave_A(self.c_be, self.grid, self.backend)

    @cached_property
    def plan(self) -> hs.EvolutionPlan:
        return hs.plan_evolution(self.generator.alpha, self.t, self.eps_hs)

    def c_values(self) -> np.ndarray:
        return self.series.grid_values(self.grid.points(0), self.grid.points(1)).ravel()

    def dense_generator(self) -> np.ndarray:
        return po.dense_wave_A(self.c_values(), self.grid)

    def initial(self) -> StateVector:
        return po.prepare_initial(self.grid)

    def run_blockenc(self) -> tuple[StateVector, float]:
        return hs.evolve_be(self.generator, self.initial(), self.plan)

    def run_matrix(self) -> StateVector:
        return hs.evolve_exact(self.dense_generator(), self.initial(), self.t)


@dataclass
class DesignProblem:
    """Shift-parameterized forward problem and objective over a target region."""

    grid: po.GridSpec
    space: DesignSpace
    region: TargetRegion
    K: int = 3
    t: float = 1.0
    eps_hs: float = 1e-6
    backend: str = "dilation"
    series: de.FourierSeries | None = None

    def __post_init__(self):
        if len(self.space.params) != 2:
            raise ValueError("the shift design uses two parameters")
        if self.series is None:
            self.series = de.fit_fourier(gaussian_profile((0.0, 0.0)), (self.K, self.K))

    @property
    def ranges(self):
        return [(p.lo, p.hi) for p in self.space.params]

    @cached_property
    def c_be(self) -> bc.BlockEncoding:
        ms = tuple(p.m for p in self.space.params)
        return de.param_diag_be_shift(self.series, self.grid.n, ms, self.ranges, -1.0, "U_c")

    @cached_property
    def generator(self) -> bc.BlockEncoding:
        return po.assemble_param("wave", self.c_be, self.grid, self.backend)

    @cached_property
    def plan(self) -> hs.EvolutionPlan:
        return hs.plan_evolution(self.generator.alpha, self.t, self.eps_hs)

    @property
    def alpha_for(self) -> float:
        return self.plan.alpha_for

    def c_values(self, xi: Sequence[float]) -> np.ndarray:
        xs = self.grid.points(0) - xi[0]
        ys = self.grid.points(1) - xi[1]
        return self.series.grid_values(xs, ys).ravel()

    def dense_generator(self, xi: Sequence[float]) -> np.ndarray:
        return po.dense_wave_A(self.c_values(xi), self.grid)

    def region_mask_full(self) -> np.ndarray:
        """Mask over ``sel(2) | x | y`` selecting the region in the chosen component."""
        m = np.zeros((4,) + self.region.mask(self.grid).shape, dtype=bool)
        m[self.region.component] = self.region.mask(self.grid)
        return m.ravel()

    # layout of the joint register: sel(2) | design | x | y
    def _joint_initial(self) -> np.ndarray:
        w0 = po.prepare_initial(self.grid).amplitudes.reshape(4, -1)
        D = self.space.size
        psi = np.zeros((4, D, w0.shape[1]), dtype=complex)
        psi[:, :, :] = w0[:, None, :] / math.sqrt(D)
        return psi.ravel()

    def G_matrix(self, xi: Sequence[float]) -> float:
        A = self.dense_generator(xi)
        w = matexp(-A, self.t) @ po.prepare_initial(self.grid).amplitudes
        return float(np.sum(np.abs(w[self.region_mask_full()]) ** 2))

    def blockenc_sectors(self) -> tuple[np.ndarray, np.ndarray]:
        """One projected evolution with the design register in uniform superposition.

        Returns per-cell ``G_be = alpha_for^2 ||Pi_S V|0, xi>||^2`` and the per-cell
        success probability ``||<0_anc| V |0, xi>||^2``.
        """
        enc = hs.evolution_be(self.generator, self.plan, check=False)
        out = enc.block_action(self._joint_initial()[None, :])[0]
        D = self.space.size
        t = out.reshape(4, D, -1) * math.sqrt(D)
        mask = self.region_mask_full().reshape(4, -1)
        prob = np.sum(np.abs(t) ** 2, axis=(0, 2))
        reg = np.sum(np.abs(t) ** 2 * mask[:, None, :], axis=(0, 2))
        return self.alpha_for**2 * reg, prob

    def objective_be(self) -> bc.BlockEncoding:
        return objective_be(self)


def objective_be(problem: DesignProblem) -> bc.BlockEncoding:
    """Encoding over the design register of ``diag(2 G(xi)/alpha_for^2 - 1)``.

    Realized as ``V^dag (2 Pi_S - I) V`` with ``V`` the evolution encoding after the
    initial-state circuit; every qubit other than the design register is an
    ancilla. The attached reference is the dense-evolution value of the same
    expression; ``eps`` bounds its deviation by ``4 eps_hs / alpha_for``.
    """
    grid, space = problem.grid, problem.space
    A = problem.generator
    plan = problem.plan
    evol = hs.evolution_be(A, plan, check=False)
    a_ev = evol.ancillas
    m = space.qubits
    ng = grid.qubits
    # evolution register order: anc | sel(2) | design | x | y
    ev_q = a_ev + 2 + m + ng
    prep = sv.embed(po.initial_circuit(grid), ev_q,
                    tuple(range(a_ev, a_ev + 2)) + tuple(range(a_ev + 2 + m, ev_q)))
    V = sv.compose(prep, evol.action)
    sel_mask = problem.region_mask_full().reshape(4, 1, -1)
    def negative():
        good = np.zeros((2**a_ev, 4, 2**m, 2**ng), dtype=bool)
        good[0] = np.broadcast_to(sel_mask, (4, 2**m, 2**ng))
        return ~good.ravel()
    refl = sv.SignDiag(ev_q, negative)
    body = sv.compose(V, refl, sv.adjoint(V))
    # objective register: anc | sel | x | y | design
    pos = (tuple(range(a_ev + 2)) + tuple(range(ev_q - m, ev_q))
           + tuple(range(a_ev + 2, ev_q - m)))
    action = sv.embed(body, ev_q, pos)
    alpha_for = plan.alpha_for
    cells = space.cells()

    def ref():
        return np.diag([2 * problem.G_matrix(xi) / alpha_for**2 - 1 for xi in cells]).astype(complex)

    cache: dict = {}

    def diag_values():
        if "d" not in cache:
            G, _ = problem.blockenc_sectors()
            cache["d"] = 2 * G / alpha_for**2 - 1
        return cache["d"]

    return bc.BlockEncoding(
        1.0, ev_q - m, 4 * plan.eps_hs / alpha_for, m, action,
        bc.merge_counters(evol.counters, bc.adjoint(evol).counters), 2 * evol.gate_count,
        "objective", ref,
        fast=lambda x: x * diag_values(), fast_adj=lambda x: x * diag_values(),
    )


# --- landscape -----------------------------------------------------------------------

@dataclass
class Landscape:
    cells: list[tuple[float, ...]]
    F_matrix: np.ndarray | None = None
    F_blockenc: np.ndarray | None = None
    success_prob: np.ndarray | None = None
    raw_diagonal: np.ndarray | None = None
    alpha_for: float = 1.0
    shape: tuple[int, ...] = field(default=())

    def argmax(self, which: str = "matrix") -> int:
        arr = self.F_matrix if which == "matrix" else self.F_blockenc
        return int(np.argmax(arr))


def landscape(problem: DesignProblem, mode: str = "both", threads: int = 1) -> Landscape:
    """``F(xi)`` over every register value.

    ``matrix`` evolves the dense per-cell generator; ``blockenc`` runs the
    parameterized encoding once with the design register in superposition and
    also reports per-cell success probabilities. ``both`` fills both columns.
    """
    if mode not in ("matrix", "blockenc", "both"):
        raise ValueError("mode must be matrix, blockenc or both")
    cells = problem.space.cells()
    out = Landscape(cells, alpha_for=problem.alpha_for,
                    shape=tuple(2**p.m for p in problem.space.params))
    if mode in ("matrix", "both"):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                G = list(ex.map(problem.G_matrix, cells))
        else:
            G = [problem.G_matrix(xi) for xi in cells]
        out.F_matrix = np.sqrt(np.array(G))
    if mode in ("blockenc", "both"):
        G, prob = problem.blockenc_sectors()
        out.F_blockenc = np.sqrt(np.maximum(G, 0.0))
        out.success_prob = prob
        out.raw_diagonal = 2 * G / problem.alpha_for**2 - 1
    return out


# --- output helpers ------------------------------------------------------------------

def fmt(v: float) -> str:
    return f"{float(v):.17g}"


def landscape_csv(ls: Landscape) -> str:
    lines = ["xi_x,xi_y,F_matrix,F_blockenc,success_prob"]
    nan = float("nan")
    for i, xi in enumerate(ls.cells):
        fm = ls.F_matrix[i] if ls.F_matrix is not None else nan
        fb = ls.F_blockenc[i] if ls.F_blockenc is not None else nan
        sp = ls.success_prob[i] if ls.success_prob is not None else nan
        lines.append(",".join([fmt(xi[0]), fmt(xi[1]), fmt(fm), fmt(fb), fmt(sp)]))
    return "\n".join(lines) + "\n"


def objective_csv(ls: Landscape) -> str:
    """Raw block-encoded diagonal next to ``F`` and ``F^2`` (``G``)."""
    lines = ["xi_x,xi_y,raw_diagonal,F_blockenc,F_blockenc_squared"]
    for i, xi in enumerate(ls.cells):
        f = ls.F_blockenc[i]
        lines.append(",".join([fmt(xi[0]), fmt(xi[1]), fmt(ls.raw_diagonal[i]), fmt(f), fmt(f * f)]))
    return "\n".join(lines) + "\n"


def write_pgm(path, image: np.ndarray, note: str = "") -> tuple[float, float]:
    """Binary PGM (P5, maxval 255) with linear min-max scaling and a sidecar text file.

    ``image`` rows are written top to bottom as given.
    """
    img = np.asarray(image, dtype=float)
    lo, hi = float(np.min(img)), float(np.max(img))
    scaled = np.zeros_like(img) if hi == lo else (img - lo) / (hi - lo)
    data = np.round(scaled * 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())
    side = str(path) + ".txt"
    with open(side, "w") as f:
        f.write(f"min {fmt(lo)}\nmax {fmt(hi)}\nscaling linear min-max to 0..255\n")
        if note:
            f.write(note.rstrip("\n") + "\n")
    return lo, hi


def heatmap_xy(values: np.ndarray) -> np.ndarray:
    """Arrange an ``(Nx, Ny)`` array as an image: y increases upward, x to the right."""
    return np.asarray(values)[:, ::-1].T

"""Evolution ``exp(-A t)`` of a block-encoded anti-Hermitian generator.

With ``H = -i A`` the Jacobi-Anger expansion
``exp(-i tau x) = J_0(tau) + 2 sum_k (-i)^k J_k(tau) T_k(x)``, ``tau = alpha t``,
is truncated at order ``R`` and realized as an LCU of Chebyshev iterates of the
encoding of ``H``. Post-selection is exact projection with its probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import becalc as bc
from . import statevec as sv
from .linalg import StateVector, check_cap, matexp


class EvolutionError(RuntimeError):
    """Raised when the post-selected evolution amplitude vanishes."""


def bessel_j(x: float, kmax: int) -> np.ndarray:
    """``J_0(x) .. J_kmax(x)`` by Miller's downward recurrence.

    The recurrence starts well above ``max(kmax, x)`` and is normalized with
    ``J_0 + 2 sum J_2k = 1`` for the sign and ``J_0^2 + 2 sum J_k^2 = 1`` for the scale.
    """
    x = float(x)
    if x == 0.0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    if x < 0:
        j = bessel_j(-x, kmax)
        return j * (-1.0) ** np.arange(kmax + 1)
    if x < 1e-5:
        # two series terms; the recurrence would overflow on 2k/x
        k = np.arange(kmax + 1)
        lead = np.exp(k * math.log(x / 2) - np.array([math.lgamma(v + 1) for v in k]))
        return lead * (1 - (x / 2) ** 2 / (k + 1))
    top = int(max(kmax, x) + 30 + 10 * math.sqrt(max(kmax, x)))
    top += top % 2
    vals = np.zeros(top + 2)
    vals[top] = 1.0
    for k in range(top, 0, -1):
        vals[k - 1] = (2 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e100:
            vals[k - 1:] *= 1e-100
    j = vals[: top + 1]
    scale = math.sqrt(j[0] ** 2 + 2 * np.sum(j[1:] ** 2))
    sign = np.sign(j[0] + 2 * np.sum(j[2::2]))
    j = sign * j / scale
    return j[: kmax + 1]


def bessel_tail(j: np.ndarray, R: int) -> float:
    """``2 sum_{k>R} |J_k|`` over the available orders."""
    return float(2 * np.sum(np.abs(j[R + 1:])))


@dataclass(frozen=True)
class EvolutionPlan:
    t: float
    eps_hs: float
    R: int
    alpha_tau: float
    bessel_weights: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        """LCU weights ``y_0 = J_0``, ``y_k = 2 (-i)^k J_k``."""
        k = np.arange(self.R + 1)
        y = 2 * (-1j) ** k * self.bessel_weights
        y[0] = self.bessel_weights[0]
        return y

    @property
    def alpha_for(self) -> float:
        return float(np.sum(np.abs(self.coefficients)))

    @property
    def tail(self) -> float:
        j = bessel_j(self.alpha_tau, self.R + int(self.alpha_tau) + 60)
        return bessel_tail(j, self.R)


def plan_evolution(alpha: float, t: float, eps_hs: float) -> EvolutionPlan:
    """Smallest truncation order meeting the Bessel tail bound (and ``R >= e alpha t / 2``)."""
    if not eps_hs > 0:
        raise ValueError("eps_hs must be positive")
    if t < 0 or alpha <= 0:
        raise ValueError("need t >= 0 and alpha > 0")
    tau = float(alpha) * float(t)
    if tau == 0.0:
        return EvolutionPlan(float(t), eps_hs, 0, 0.0, np.array([1.0]))
    kmax = int(tau + 60 + 10 * math.sqrt(tau))
    j = bessel_j(tau, kmax)
    tails = 2 * np.cumsum(np.abs(j[::-1]))[::-1]  # tails[R] = 2 sum_{k>=R}
    R = next(r for r in range(kmax + 1) if (tails[r + 1] if r + 1 <= kmax else 0.0) <= eps_hs)
    R = max(R, math.ceil(math.e * tau / 2))
    if R > kmax:
        j = bessel_j(tau, R)
    return EvolutionPlan(float(t), eps_hs, R, tau, j[: R + 1].copy())


def hermitian_be(U_A: bc.BlockEncoding) -> bc.BlockEncoding:
    """Encoding of ``H = -i A``."""
    return bc.scale_phase(U_A, -1j, f"H({U_A.label})")


def _chain(UH: bc.BlockEncoding, weights: np.ndarray):
    """Projected map ``x -> sum_k weights[k] <0|S_k|0> x`` of the Chebyshev LCU.

    ``S_k`` alternates ``U`` and ``U^dag`` with reflections, exactly as in
    :func:`becalc.chebyshev`; each order costs one application.
    """
    a, n = UH.ancillas, UH.sys_qubits
    nq = 1 + a + n
    u = sv.embed(UH.action, nq, tuple(range(1, nq)))
    refl = sv.Reflection(nq, tuple(range(1 + a)))
    d = 2**n

    def f(x):
        x = np.asarray(x, dtype=complex)
        out = weights[0] * x
        if len(weights) == 1:
            return out
        phi = np.zeros((x.shape[0], 2**nq), dtype=complex)
        phi[:, :d] = x
        for k in range(1, len(weights)):
            if k > 1:
                phi = refl.apply(phi)
            phi = u.apply(phi) if k % 2 == 1 else u.apply_adjoint(phi)
            if weights[k] != 0:
                out = out + weights[k] * phi[:, :d]
        return out

    return f


def evolution_be(U_A: bc.BlockEncoding, plan: EvolutionPlan, check: bool = True) -> bc.BlockEncoding:
    """LCU encoding of the truncated expansion of ``exp(-A t)`` with ``alpha = alpha_for``."""
    UH = hermitian_be(U_A)
    y = plan.coefficients
    terms = [bc.chebyshev(UH, k, check=check and k == 1) for k in range(plan.R + 1)]
    enc = bc.lcu(list(y), terms, "evolution")
    w = np.array([complex(v) for v in y]) / float(bc.l1_norm(list(y)))
    return enc.replace(fast=_chain(UH, w), fast_adj=None)


def evolve_be(U_A: bc.BlockEncoding, w0: StateVector, plan: EvolutionPlan,
              floor: float = 1e-12) -> tuple[StateVector, float]:
    """Apply the evolution encoding to ``|0>|w0>`` and project the ancillas onto zero.

    Returns the renormalized state and the exact projection probability.
    """
    if w0.num_qubits != U_A.sys_qubits:
        raise ValueError("slice mismatch: state and generator sizes differ")
    enc = evolution_be(U_A, plan, check=False)
    out = enc.block_action(w0.amplitudes[None, :])[0]
    prob = float(np.vdot(out, out).real)
    if prob < floor:
        raise EvolutionError(f"evolution amplitude vanished (probability {prob:.3e})")
    return StateVector(out / math.sqrt(prob), w0.layout), prob


def evolve_exact(A: np.ndarray, w0: StateVector, t: float) -> StateVector:
    """``exp(-A t) w0`` through the dense matrix exponential."""
    check_cap(A.shape[0], "generator")
    out = matexp(-np.asarray(A), t) @ w0.amplitudes
    nrm = np.linalg.norm(out)
    return StateVector(out, w0.layout, normalized=abs(nrm - 1) <= 1e-12)

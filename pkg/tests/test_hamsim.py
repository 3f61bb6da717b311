import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st
from scipy.special import jv

from diagpde import becalc as bc
from diagpde import hamsim as hs
from diagpde import pdeops as po
from diagpde.linalg import StateVector


@settings(max_examples=40, deadline=None)
@given(st.floats(-150, 150))
def test_bessel_matches_scipy(x):
    k = np.arange(61)
    assert np.allclose(hs.bessel_j(x, 60), jv(k, x), atol=1e-12)


def test_plan_meets_tail_and_minimality():
    for alpha, t, eps in [(10.0, 1.0, 1e-6), (3.0, 0.5, 1e-10), (50.0, 1.0, 1e-3)]:
        p = hs.plan_evolution(alpha, t, eps)
        tau = alpha * t
        j = jv(np.arange(p.R + 200), tau)
        assert 2 * np.sum(np.abs(j[p.R + 1:])) <= eps
        assert p.R >= np.e * tau / 2
        below = max(np.ceil(np.e * tau / 2), 0)
        if p.R - 1 >= below:
            assert 2 * np.sum(np.abs(j[p.R:])) > eps
        assert p.alpha_for == pytest.approx(abs(j[0]) + 2 * np.sum(np.abs(j[1:p.R + 1])))


def test_plan_validation_and_zero_time():
    with pytest.raises(ValueError):
        hs.plan_evolution(1.0, 1.0, 0.0)
    p = hs.plan_evolution(4.0, 0.0, 1e-6)
    assert p.R == 0 and p.alpha_for == 1


def test_jacobi_anger_identity():
    p = hs.plan_evolution(1.0, 7.0, 1e-13)
    x = np.linspace(-1, 1, 11)
    T = np.cos(np.outer(np.arange(p.R + 1), np.arccos(x)))
    assert np.allclose(p.coefficients @ T, np.exp(-1j * 7.0 * x), atol=1e-12)


def _wave(rng, n=2):
    g = po.GridSpec.wave_demo(n)
    c = rng.uniform(0.5, 1.5, g.N)
    return g, c, po.assemble_wave_A(bc.diag_be_values(c, label="U_c"), g)


def test_evolution_block_matches_expm(rng):
    g, c, U = _wave(rng, 1)
    plan = hs.plan_evolution(U.alpha, 0.05, 1e-8)
    E = hs.evolution_be(U, plan)
    exact = scipy.linalg.expm(-po.dense_wave_A(c, g) * 0.05)
    assert E.alpha == pytest.approx(plan.alpha_for)
    assert bc.verify(E, exact, use_fast=False) <= 1e-8 + 1e-10
    assert bc.verify(E, exact) <= 1e-8 + 1e-10


def test_evolve_state_and_probability(rng):
    g, c, U = _wave(rng, 2)
    w0 = po.prepare_initial(g)
    plan = hs.plan_evolution(U.alpha, 0.2, 1e-9)
    out, p = hs.evolve_be(U, w0, plan)
    ref = scipy.linalg.expm(-po.dense_wave_A(c, g) * 0.2) @ w0.amplitudes
    assert np.linalg.norm(out.amplitudes - ref / np.linalg.norm(ref)) < 1e-8
    # anti-Hermitian generator preserves the norm, so p = 1/alpha_for^2 up to eps
    assert p == pytest.approx(1 / plan.alpha_for**2, rel=1e-7)
    exact = hs.evolve_exact(po.dense_wave_A(c, g), w0, 0.2)
    assert np.allclose(exact.amplitudes, ref)


def test_evolve_rejects_size_mismatch(rng):
    _, _, U = _wave(rng, 2)
    plan = hs.plan_evolution(U.alpha, 0.1, 1e-6)
    with pytest.raises(ValueError, match="slice mismatch"):
        hs.evolve_be(U, StateVector(np.eye(8)[0]), plan)

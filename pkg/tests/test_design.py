import math
import time

import numpy as np
import pytest
import scipy.linalg

from diagpde import becalc as bc
from diagpde import design as ds
from diagpde import diagenc as de
from diagpde import pdeops as po


def small_problem(t=0.05, series=None, m=1, n=2, **kw):
    g = po.GridSpec.wave_demo(n)
    region = ds.TargetRegion.rectangle(g, (0.0, 0.5), (0.3, 1.0))
    return ds.DesignProblem(g, ds.DesignSpace.shift2d(m), region, K=2, t=t, eps_hs=1e-8,
                            series=series, **kw)


def test_profile_and_cells():
    c = ds.gaussian_profile((0.2, 0.7))
    assert c(0.2, 0.7) == 0.0
    assert c(0.2 + ds.SIGMA_X, 0.7) == pytest.approx(1 - math.exp(-0.5))
    sp = ds.DesignSpace.shift2d((1, 2))
    cells = sp.cells()
    assert sp.size == 8 and cells[0] == (0.0, 0.0) and cells[1] == (0.0, 1 / 3) and cells[4] == (1.0, 0.0)
    with pytest.raises(ValueError):
        ds.DesignParam("x", 0)


def test_rectangle_region():
    g = po.GridSpec.wave_demo(2)
    r = ds.TargetRegion.rectangle(g, (0, 0.4), (0.6, 1.0), component=1)
    assert set(r.cells) == {(0, 2), (0, 3), (1, 2), (1, 3)}
    with pytest.raises(ValueError):
        ds.TargetRegion(((9, 0),)).mask(g)


def test_front_positions_on_synthetic_pulse():
    g = po.GridSpec.wave_demo(4)
    xs, ys = g.points(0), g.points(1)
    peak = 0.5 - 0.2 * np.cos(2 * np.pi * ys)  # slowest travel in the middle of y
    w = np.exp(-((xs[:, None] - peak[None, :]) ** 2) / 0.01)
    ok, iy = ds.front_lag_in_middle(w, g)
    x0 = (14 / 15 + 1) / 2
    assert ok and abs(ys[iy] - 0.5) < 0.07
    assert np.allclose(ds.front_positions(w, g), x0 - peak, atol=0.02)


def test_matrix_G_against_direct_expm():
    P = small_problem(t=0.3)
    xi = (1.0, 0.0)
    g = P.grid
    xs, ys = g.points(0) - xi[0], g.points(1) - xi[1]
    c = np.array([[P.series(x, y) for y in ys] for x in xs]).ravel()
    w = scipy.linalg.expm(-po.dense_wave_A(c, g) * 0.3) @ po.prepare_initial(g).amplitudes
    mask = P.region.mask(g).ravel()
    assert P.G_matrix(xi) == pytest.approx(np.sum(np.abs(w[: g.N][mask]) ** 2), rel=1e-12)


def test_constant_coefficient_gives_flat_landscape():
    flat = de.fit_fourier(lambda x, y: 0 * x + 1.0, (1, 1))
    ls = ds.landscape(small_problem(t=0.4, series=flat), "both")
    assert np.ptp(ls.F_matrix) < 1e-12
    assert np.ptp(ls.F_blockenc) < 1e-7


def test_zero_time_objective_is_initial_overlap():
    P = small_problem(t=0.0)
    ls = ds.landscape(P, "both")
    w0 = po.prepare_initial(P.grid).amplitudes
    G0 = np.sum(np.abs(w0[P.region_mask_full()]) ** 2)
    assert np.allclose(ls.F_matrix, math.sqrt(G0))
    assert np.allclose(ls.F_blockenc, math.sqrt(G0))
    assert np.allclose(ls.success_prob, 1.0)


def test_blockenc_landscape_agrees_with_matrix():
    P = small_problem(t=0.5, m=2)
    ls = ds.landscape(P, "both", threads=2)
    assert np.max(np.abs(ls.F_blockenc - ls.F_matrix)) < 1e-5
    assert ls.argmax("matrix") == ls.argmax("blockenc")
    assert np.all(ls.success_prob <= 1 + 1e-12)
    # success probability equals 1/alpha_for^2 up to the truncation error
    assert np.allclose(ls.success_prob * P.alpha_for**2, 1, atol=1e-6)
    assert np.allclose(ls.raw_diagonal, 2 * ls.F_blockenc**2 / P.alpha_for**2 - 1)


def test_objective_encoding_full_action_matches_reference():
    P = small_problem(t=0.02, n=1)
    U = P.objective_be()
    assert U.alpha == 1.0 and U.sys_qubits == 2
    ref = U.reference_matrix()
    full = bc.materialize_block(U, use_fast=False)
    fast = bc.materialize_block(U)
    assert np.allclose(full, fast, atol=1e-12)
    assert np.allclose(full, np.diag(np.diag(full)), atol=1e-12)
    assert bc.verify(U, ref, use_fast=False) <= U.eps
    assert np.all(np.abs(np.diag(full)) <= 1 + 1e-12)


def test_csv_and_pgm(tmp_path):
    ls = ds.landscape(small_problem(t=0.1), "both")
    text = ds.landscape_csv(ls)
    lines = text.strip().split("\n")
    assert lines[0] == "xi_x,xi_y,F_matrix,F_blockenc,success_prob" and len(lines) == 5
    assert float(lines[1].split(",")[2]) == ls.F_matrix[0]
    assert ds.objective_csv(ls).startswith("xi_x,xi_y,raw_diagonal")
    img = ds.heatmap_xy(np.arange(6.0).reshape(3, 2))  # (Nx=3, Ny=2)
    assert img.shape == (2, 3) and img[-1, 0] == 0.0 and img[0, 2] == 5.0
    lo, hi = ds.write_pgm(tmp_path / "a.pgm", img, "note")
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n3 2\n255\n") and len(raw) == len(b"P5\n3 2\n255\n") + 6
    assert raw[-6:][3] == 0 and raw[-6:][2] == 255
    assert (tmp_path / "a.pgm.txt").read_text().startswith("min 0\nmax 5\n")


def test_forward_model_small():
    fm = ds.ForwardModel(po.GridSpec.wave_demo(2), K=2, t=0.3, eps_hs=1e-8)
    st, p = fm.run_blockenc()
    ex = fm.run_matrix()
    assert np.linalg.norm(st.amplitudes - ex.amplitudes) < 1e-7
    assert p == pytest.approx(1 / fm.plan.alpha_for**2, rel=1e-6)

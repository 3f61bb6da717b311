import math

import numpy as np
import pytest
from scipy.optimize import nnls

from diagpde import becalc as bc
from diagpde import costmodel as cm
from diagpde import diagenc as de
from diagpde import pdeops as po


def built(kind, d, n=1, K=1):
    grid = po.GridSpec.periodic((n,) * d)
    s = de.fit_fourier(cm._sweep_function(d), (K,) * d, dims=d)
    enc = lambda label: de.diag_be_fourier(s, grid.n, label)
    D = po.diff_be(0, "+", grid, "shift_lcu")
    Dm = cm.Meta(float(D.alpha), D.ancillas, float(D.eps), "D+")
    if kind == "A2nd":
        R, Kp, Z, G = enc("U_rho"), enc("U_kappa"), enc("U_zeta"), enc("U_gamma")
        U = po.assemble_A2nd(po.CoefficientSet2nd(R, Kp, Z, G), grid, "auto")
        rep = cm.predict_A2nd(*(cm.Meta.of(e) for e in (R, Kp, Z, G)), Dm, d)
    else:
        Kp, G = enc("U_kappa"), enc("U_gamma")
        bp, bm = tuple(enc("U_b+") for _ in range(d)), tuple(enc("U_b-") for _ in range(d))
        U = po.assemble_A1st(po.CoefficientSet1st(Kp, bp, bm, G), grid, "auto")
        rep = cm.predict_A1st(cm.Meta.of(Kp), cm.Meta.of(bp[0]), cm.Meta.of(G), Dm, d)
    return U, rep.reconcile(U)


def test_predict_A2nd_hand_values():
    R, K, Z, G = (cm.Meta(2.0, 3, 1e-3, "U_rho"), cm.Meta(1.5, 2, 2e-3, "U_kappa"),
                  cm.Meta(0.5, 4, 1e-4, "U_zeta"), cm.Meta(1.0, 1, 1e-3, "U_gamma"))
    D = cm.Meta(6.0, 1, 0.0, "D+")
    rep = cm.predict_A2nd(R, K, Z, G, D, 2)
    alpha, anc, eps = rep.predicted_triple
    assert alpha == 4 * max(4 * 0.5, 1.5 * 6 * 2, 2 * 1)
    assert anc == 3 + 4 + 1 + 1
    qsvt = 4 * 1e-4 + 8 * 0.5 * math.sqrt(1e-3)
    assert eps == pytest.approx(4 * max(6 * 1.5 * 1e-3 + 2 * 6 * 2e-3, 2 * 1e-3 + 1e-3, qsvt))
    assert rep.query_counts["ctrl(U_rho)"] == 6 and rep.query_counts["ctrl(U_kappa)"] == 4


def test_predict_A1st_hand_values():
    k, b, g = cm.Meta(2.0, 3, 1e-3, "U_kappa"), cm.Meta(1.0, 3, 1e-3), cm.Meta(0.5, 3, 1e-2, "U_gamma")
    D = cm.Meta(6.0, 1, 0.0, "D+")
    rep = cm.predict_A1st(k, b, g, D, 1)
    assert rep.predicted_triple == (4 * 72.0, 3 + 2 + 3, pytest.approx(4 * 0.036))
    assert rep.query_counts["ctrl(D+)"] == 3


@pytest.mark.parametrize("kind", ["A2nd", "A1st"])
@pytest.mark.parametrize("d", [1, 2])
def test_reconciliation(kind, d):
    U, rep = built(kind, d)
    assert rep.counts_match, (rep.measured_counts, rep.query_counts)
    ca, _, ce = rep.construction_triple
    pa, _, pe = rep.predicted_triple
    assert ca <= pa * (1 + 1e-12)
    assert ce <= max(pe, rep.extras.get("eps_product_squaring", 0.0)) * (1 + 1e-12)
    assert any(r[0].endswith("gate_count") for r in rep.rows())


def test_cost_csv_escapes_commas():
    text = cm.cost_csv([("a", "1", "2", "x, y")])
    assert text.splitlines() == ["quantity,predicted,measured,note", "a,1,2,x; y"]


def test_measured_gates_grow_with_K_and_n():
    g = [[cm.measure_gates("A2nd", 1, K, n) for n in (2, 3)] for K in (1, 2, 3)]
    assert g[0][0] < g[1][0] < g[2][0]
    assert all(row[0] < row[1] for row in g)


def test_scaling_fit_is_nnls_on_features():
    fit = cm.gate_scaling_check("A1st", (1, 2), (2, 3), (1,))
    X = cm.scaling_features(fit.points[:, 0], fit.points[:, 1], fit.points[:, 2])
    c, _ = nnls(X, fit.points[:, 3])
    assert np.allclose(c, fit.coeffs)
    assert np.all(fit.coeffs >= 0)
    assert fit.residual == pytest.approx(np.linalg.norm(X @ c - fit.points[:, 3]) / np.linalg.norm(fit.points[:, 3]))


def test_scaling_features_columns():
    X = cm.scaling_features([2], [4], [3])
    assert np.allclose(X, [[2 * 16, 2 * 6 * 2, 36]])


@pytest.mark.parametrize("case", [de.Analytic(1.0, 1.0), de.Differentiable(2, 1.0)])
def test_k_for_error(case):
    r = cm.k_for_error(case, 1e-3, 2, 6)
    assert r.h == pytest.approx(1 / 7) and r.alpha_D == pytest.approx(42)
    assert r.eps_kappa == pytest.approx(1e-3 / (7 * 42**2))
    assert de.truncation_bound(case, r.K) <= r.eps_kappa
    assert de.truncation_bound(case, r.K - 1) > r.eps_kappa
    with pytest.raises(ValueError):
        cm.k_for_error(case, 0.0, 2, 6)


def test_forward_qubit_ledger():
    grid = po.GridSpec.wave_demo(2)
    c = de.diag_be_fourier(de.fit_fourier(lambda x, y: 1 + 0 * x, (3, 3)), grid.n, "U_c")
    A = po.assemble_wave_A(c, grid)
    rows = cm.forward_qubit_ledger(A, grid, c.ancillas, 15)
    total = rows[-1]
    assert total[1] == 4 + 6 + 2 + 2 + 2
    assert total[2] == 4 + 6 + 2 + (A.ancillas - 6) + 4 + 1

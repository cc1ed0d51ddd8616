import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.optimize import minimize_scalar

from cwpotts import bifurcation as B
from cwpotts import lines as L
from cwpotts import potential as P

LOG2 = math.log(2)


# ---------------------------------------------------------------------------
# symmetric cusp exit and NG


def test_sce_helper_at_origin():
    assert_allclose(L.sce_helper(0.0), 4.0)
    assert L.sce_line(-1e-4).g < 1e-3


@given(st.floats(-6.0, -0.01))
def test_sce_residuals(s):
    assert L.sce_line(s).residual_norm < 1e-10


def test_sce_domain():
    with pytest.raises(B.ParameterError):
        L.sce_line(0.1)


def test_beta_ng_value_and_golden_section_oracle():
    assert abs(L.beta_ng() - 2.52885) < 5e-5
    res = minimize_scalar(lambda s: float(L.sce_beta(s)), bracket=(-3.0, -1.0, -0.2), method="golden", tol=1e-12)
    assert abs(res.fun - L.beta_ng()) < 1e-8
    s0 = L.ng_point()[0]
    assert L.sce_beta(s0 - 1e-3) > L.beta_ng() and L.sce_beta(s0 + 1e-3) > L.beta_ng()


def test_t_ng_lies_on_sce():
    smp = L.t_ng(2.8)
    r = L.sce_residuals(2.8, smp.g, smp.aux["y"])
    assert max(abs(v) for v in r.values()) < 1e-9
    assert smp.aux["w"] > 2


def test_t_ng_approaches_fold():
    near = L.t_ng(L.beta_ng() + 1e-6)
    s0 = L.ng_point()[0]
    assert abs(near.g - L.sce_g(s0)) < 1e-2
    with pytest.raises(B.ParameterError):
        L.t_ng(2.5)


# ---------------------------------------------------------------------------
# BE, BU


def test_beta_be():
    assert abs(L.beta_be() - 2.59590) < 5e-5
    assert L.beta_ng() < L.beta_be() < 8 / 3


def test_bu_meets_sce_at_be():
    _, beta, g = L.be_point()
    assert abs(L.bu_line(L.beta_be() + 1e-9).g - g) < 1e-6
    s = L.be_point()[0]
    assert abs(L.sce_beta(s) - beta) < 1e-6 and abs(L.sce_g(s) - g) < 1e-6


@pytest.mark.parametrize("beta", [2.62, 2.7, 2.9])
def test_bu_flat_direction(beta):
    smp = L.bu_line(beta)
    m = P.point(0.0, smp.aux["y"], beta)
    gxx, gxy, _ = P.chart_hessian_2x2(P.chi(m, beta, smp.g), m, beta, smp.g)
    assert abs(gxx) < 1e-9 and abs(gxy) < 1e-12


# ---------------------------------------------------------------------------
# ACE, TPE


@pytest.mark.parametrize("g", [0.05, 0.12, 0.2])
def test_ace_tip_on_edge(g):
    smp = L.ace_line(g)
    x, y, beta = smp.aux["x"], smp.aux["y"], smp.beta
    jet = P.chart_jet(lambda m, Bb, G: P.chi_chart(m, Bb, G)[1], x, y, beta, smp.g, 1)
    assert abs(jet.value + beta / 6) < 1e-9
    assert smp.residual_norm < 1e-10


@pytest.mark.parametrize("beta", [2.65, 2.7, 2.75])
def test_tpe_replay(beta):
    smp = L.tpe_line(beta)
    x, y, yp, g = smp.aux["x"], smp.aux["y"], smp.aux["y_prime"], smp.g
    alpha = L.EDGE_MIDPOINT
    m, mp = P.point(x, y, beta), P.point(0.0, yp, beta)
    assert abs(P.hs_value(alpha, m, beta, g) - P.hs_value(alpha, mp, beta, g)) < 1e-9
    assert_allclose(P.chi(m, beta, g), P.chi(mp, beta, g), atol=1e-9)
    assert_allclose(P.chi(mp, beta, g), alpha, atol=1e-9)


# ---------------------------------------------------------------------------
# B2B


def test_b2b_constants():
    assert abs(L.b2b_s_star() - 0.66656) < 5e-5
    smp = L.b2b_line(2 / 3)
    assert abs(smp.beta - 8 / 3) < 1e-9
    assert abs(smp.g - 0.026481) < 5e-6


def test_b2b_threshold_is_descartes_sign_change():
    s = L.b2b_s_star()
    below, above = L.shifted_cubic_coefficients(s - 1e-3), L.shifted_cubic_coefficients(s + 1e-3)
    assert below[-1] > 0 > above[-1]
    assert np.all(above[:-1] > 0)
    with pytest.raises(B.ParameterError):
        L.b2b_line(s - 1e-3)


@settings(max_examples=50)
@given(st.floats(0.668, 3.0))
def test_b2b_single_root_above_two(s):
    roots = np.roots(L.b2b_cubic_coefficients(s))
    real = [r.real for r in roots if abs(r.imag) < 1e-9 and r.real > 2]
    assert len(real) == 1
    assert L.b2b_line(s).residual_norm < 1e-10


# ---------------------------------------------------------------------------
# MTE


@pytest.mark.parametrize("beta", [2.67, 2.7, 2.75, 2.772])
def test_mte_replay_and_closed_form(beta):
    smp = L.mte_line(beta)
    y, yp, g = smp.aux["y"], smp.aux["y_prime"], smp.g
    assert abs(y - yp) > 1e-3
    assert abs(L.mte_w(beta, y) - L.mte_w(beta, yp)) < 1e-10
    for v in (y, yp):
        m = P.point(0.0, v, beta)
        assert np.linalg.norm(P.hs_gradient(L.VERTEX, m, beta, g)) < 1e-9
    d = P.hs_value(L.VERTEX, P.point(0.0, y, beta), beta, g) - P.hs_value(L.VERTEX, P.point(0.0, yp, beta), beta, g)
    assert abs(d) < 1e-9
    # independent closed form of the vertex exit
    assert abs(g - (LOG2 - beta / 4)) < 1e-12
    assert abs(y + yp - beta / 6) < 1e-10


def test_mte_domain():
    with pytest.raises(B.ParameterError):
        L.mte_line(2.8)


# ---------------------------------------------------------------------------
# EW, EU


def test_ew_limit_closed_form():
    assert abs(L.ew_beta(2 * LOG2, 2.0) - 4 * LOG2) < 1e-14
    smp = L.ew_line(2 * LOG2 + 1e-9)
    assert abs(smp.beta - 4 * LOG2) < 1e-8
    with pytest.raises(B.ParameterError):
        L.ew_line(1.0)


@pytest.mark.parametrize("s", [1.45, 1.8, 2.2])
def test_ew_four_minima(s):
    smp = L.ew_line(s)
    assert smp.residual_norm < 1e-10
    mins = B.global_minimizers(B.find_stationary_points(np.ones(3) / 3, smp.beta, smp.g), depth_tol=1e-8)
    assert len(mins) == 4


def test_eu_taylor_at_three():
    c = L.eu_taylor(3.0)
    assert_allclose([c.x2y, c.y3, c.z2, c.constant], [1, -1 / 3, 1 / 2, -math.log(3) - 1 / 2], atol=1e-9)


@pytest.mark.parametrize("beta", [3.2, 3.5, 4.0])
def test_eu_taylor_ratio(beta):
    c = L.eu_taylor(beta)
    assert abs(c.x2y - c.reference_ratio) < 1e-6
    assert abs(c.y3 + c.x2y / 3) < 1e-9


@pytest.mark.parametrize("beta", [3.0, 3.5, 4.5])
def test_eu_double_zero_eigenvalue(beta):
    smp = L.eu_line(beta)
    c = np.ones(3) / 3
    gxx, gxy, gyy = P.chart_hessian_2x2(c, c, beta, smp.g)
    assert np.max(np.abs(np.linalg.eigvalsh([[gxx, gxy], [gxy, gyy]]))) < 1e-10
    with pytest.raises(B.ParameterError):
        L.eu_line(2.9)


# ---------------------------------------------------------------------------
# beta_*, assembly


def test_beta_star():
    bs = L.beta_star()
    assert 8 / 3 < bs < 4 * LOG2
    assert abs(L.tpe_line(bs).t - L.t_b2b(bs).t) < 1e-8
    # 8/3 lies within 0.01 below beta_*, where B2B is undefined
    lo, hi = bs - 0.005, bs + 0.01
    assert (L.tpe_line(lo).t - L.t_b2b(lo).t) * (L.tpe_line(hi).t - L.t_b2b(hi).t) < 0


def test_marked_temperatures():
    marks = L.marked_temperatures()
    assert set(marks) == {"beta_NG", "beta_BE", "8/3", "beta_*", "4log2", "3"}
    assert list(marks.values()) == sorted(marks.values())


def test_line_domains_and_failures():
    assert L.line_domain("mte")[0] == "beta"
    with pytest.raises(ValueError):
        L.line_domain("XYZ")
    samples, failures = L.evaluate_line("MTE", [2.7, 2.9])
    assert len(samples) == 1 and failures[0][0] == 2.9


def test_junction_gaps():
    gaps = L.junction_gaps(L.ng_boundary_pieces(100))
    assert max(gaps.values()) < 1e-4


@pytest.mark.parametrize("name", ["SCE", "NG", "BU", "TPE", "B2B", "MTE", "EW"])
def test_lines_inside_half_strip(name):
    samples, failures = L.sample_line(name, 20)
    assert not failures
    assert all(s.g > 0 and s.beta <= 3 + 1e-12 for s in samples)

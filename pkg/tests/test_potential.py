import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from cwpotts import potential as P
from cwpotts.model import transition_kernel

PERMS = [(0, 1, 2), (1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]

betas = st.floats(0.5, 3.0)
gs = st.floats(0.05, 3.0)


@st.composite
def simplex_points(draw, lo=0.02):
    a = draw(st.floats(lo, 1.0))
    b = draw(st.floats(lo, 1.0))
    c = draw(st.floats(lo, 1.0))
    v = np.array([a, b, c])
    return v / v.sum()


def central_gradient(f, m, h=1e-6):
    out = np.zeros(3)
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        out[a] = (f(m + e) - f(m - e)) / (2 * h)
    return out


# ---------------------------------------------------------------------------
# Gamma


@given(simplex_points(), betas, gs)
def test_gamma_rows_stochastic_and_inverse(m, beta, g):
    G = P.gamma(beta * m, g)
    assert_allclose(G.entries.sum(axis=1), 1.0, rtol=1e-14)
    assert_allclose(G.entries @ G.inverse_entries, np.eye(3), atol=1e-10)
    assert_allclose(G.inverse_entries @ np.ones(3), np.ones(3), atol=1e-10)


@given(gs)
def test_gamma_at_zero_field_is_kernel(g):
    assert_allclose(P.gamma(np.zeros(3), g).entries, transition_kernel(g), rtol=1e-14)


@given(simplex_points(), betas, gs, st.sampled_from(PERMS))
def test_gamma_equivariance(m, beta, g, perm):
    p = list(perm)
    G = P.gamma(beta * m, g).entries
    Gp = P.gamma(beta * m[p], g).entries
    assert_allclose(Gp, G[np.ix_(p, p)], rtol=1e-13)


@given(simplex_points(), betas, gs)
def test_gamma_determinant_factor(m, beta, g):
    M = beta * m
    G = P.gamma(M, g)
    E = np.exp(M)[None, :] * (1 + (np.exp(g) - 1) * np.eye(3))
    assert_allclose(np.linalg.det(E), G.determinant_factor, rtol=1e-9)


def test_gamma_requires_positive_g():
    with pytest.raises(ValueError):
        P.gamma(np.zeros(3), 0.0)


# ---------------------------------------------------------------------------
# chart


def test_chart_examples():
    assert_allclose(P.chart([1.0, 0.0, 0.0], 2.0)[:2], [0.0, 2.0 / 3.0], atol=1e-15)
    assert_allclose(P.chart([0.0, 0.5, 0.5], 2.4)[:2], [0.0, -0.4], atol=1e-15)


@given(simplex_points(), betas)
def test_chart_round_trip(m, beta):
    assert_allclose(P.chart_inverse(P.chart(m, beta), beta), m, atol=1e-14)
    assert abs(P.chart(m, beta)[2]) < 1e-14


# ---------------------------------------------------------------------------
# HS transform


def test_value_at_uniform():
    beta, g = 2.3, 0.7
    c = np.ones(3) / 3
    assert_allclose(P.hs_value(c, c, beta, g), -beta / 6 - math.log(math.exp(g) + 2), rtol=1e-14)


@given(simplex_points(), simplex_points(), betas, gs)
def test_gradient_matches_finite_differences(alpha, m, beta, g):
    fd = central_gradient(lambda q: P.hs_value(alpha, q, beta, g), m)
    assert np.max(np.abs(P.hs_gradient(alpha, m, beta, g) - fd)) < 1e-6


@given(simplex_points(), simplex_points(), betas, gs)
def test_hessian_matches_finite_differences(alpha, m, beta, g):
    h = 1e-5
    fd = np.empty((3, 3))
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        fd[a] = (P.hs_gradient(alpha, m + e, beta, g) - P.hs_gradient(alpha, m - e, beta, g)) / (2 * h)
    assert np.max(np.abs(P.hs_hessian(alpha, m, beta, g) - fd)) < 1e-6


@given(simplex_points(), simplex_points(), betas, gs)
def test_chart_hessian_block_form(alpha, m, beta, g):
    H = P.chart_hessian(alpha, m, beta, g)
    assert_allclose(H[2, 2], 3.0 / beta, rtol=1e-12)
    assert_allclose(H[:2, 2], 0.0, atol=1e-12)
    assert_allclose([H[0, 0], H[0, 1], H[1, 1]], P.chart_hessian_2x2(alpha, m, beta, g), atol=1e-12)


@given(simplex_points(), simplex_points(), betas, gs)
def test_chart_gradient_is_directional(alpha, m, beta, g):
    ux, uy = P.chart_directions(beta)
    grad = P.hs_gradient(alpha, m, beta, g)
    assert_allclose(P.chart_gradient(alpha, m, beta, g), [grad @ ux, grad @ uy], atol=1e-12)


# ---------------------------------------------------------------------------
# catastrophe map


@given(simplex_points(), betas, gs)
def test_chi_makes_m_stationary(m, beta, g):
    alpha = P.chi(m, beta, g)
    assert_allclose(alpha.sum(), 1.0, rtol=1e-12)
    assert np.linalg.norm(P.hs_gradient(alpha, m, beta, g)) < 1e-12


@given(simplex_points(), betas, gs, st.sampled_from(PERMS))
def test_chi_equivariance(m, beta, g, perm):
    p = list(perm)
    assert_allclose(P.chi(m[p], beta, g), P.chi(m, beta, g)[p], atol=1e-12)


@given(simplex_points(), betas, gs)
def test_degeneracy_is_hessian_determinant(m, beta, g):
    gxx, gxy, gyy = P.chart_hessian_2x2(P.chi(m, beta, g), m, beta, g)
    assert_allclose(P.degeneracy_on_manifold(m, beta, g), gxx * gyy - gxy**2, rtol=1e-10, atol=1e-14)


# ---------------------------------------------------------------------------
# jets on the potential


@given(st.floats(1.0, 3.0), st.floats(0.1, 2.0), st.floats(0.0, 1.0))
def test_symmetric_axis_jets_match_closed_forms(b, g, u):
    y = -b / 6 + u * (b / 3 + b / 6)
    w = math.exp(g) + 1
    e = math.exp
    jet = P.chart_jet(lambda m, B, G: P.chi_chart(m, B, G)[1], 0.0, y, b, g, 2)
    den = w * w - w - 2
    dy = (-(b + 6 * y - 2) * w * e(-3 * y) - (b - 3 * y - 1) * (w - 1) * e(3 * y) + w * w - w + 2) / den
    dyy = (3 * (b + 6 * y - 4) * w * e(-3 * y) - 3 * (b - 3 * y - 2) * (w - 1) * e(3 * y)) / den
    assert abs(jet.derivative((0, 1)) - dy) < 1e-10
    assert abs(jet.derivative((0, 2)) - dyy) < 1e-10


@given(simplex_points(), simplex_points(), betas, gs)
def test_value_jet_reproduces_chart_derivatives(alpha, m, beta, g):
    x, y, _ = P.chart(m, beta)
    jet = P.chart_jet(lambda q, B, G: P.hs_value(alpha, q, B, G), x, y, beta, g, 2)
    assert_allclose(jet.gradient(), P.chart_gradient(alpha, m, beta, g), atol=1e-12)
    gxx, gxy, gyy = P.chart_hessian_2x2(alpha, m, beta, g)
    assert_allclose(
        [jet.derivative((2, 0)), jet.derivative((1, 1)), jet.derivative((0, 2))], [gxx, gxy, gyy], atol=1e-11
    )

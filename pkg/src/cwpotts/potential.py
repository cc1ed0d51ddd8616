"""HS transform of the time-evolved Potts model and its catastrophe geometry.

Vectors (magnetizations ``m``, end-conditionings ``alpha``) are passed as
length-3 sequences whose components may be floats, ndarrays (for batched
evaluation) or :class:`~cwpotts.jets.Jet` objects. ``beta`` and ``g`` may
likewise be jets, which lets the line solvers differentiate with respect
to the model parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .jets import Jet, exp, log

SQRT3 = np.sqrt(3.0)

# unnormalised chart directions in m-space: dm = (UX*x + UY*y + UZ*z) / beta
UX = (0.0, -SQRT3, SQRT3)
UY = (2.0, -1.0, -1.0)
UZ = (1.0, 1.0, 1.0)


def _vec(v):
    if isinstance(v, (list, tuple)):
        return tuple(v)
    return tuple(v[i] for i in range(3))


def _pack(components):
    if any(isinstance(c, Jet) for c in components):
        return tuple(components)
    return np.array(np.broadcast_arrays(*components), dtype=float)


# ---------------------------------------------------------------------------
# chart


def chart(m, beta):
    """Coordinates ``(x, y, z)`` of ``m``; the scaled simplex becomes an
    equilateral triangle centred at the origin of the ``(x, y)`` plane."""
    m1, m2, m3 = _vec(m)
    k = beta / 6.0
    return _pack((k * SQRT3 * (m3 - m2), k * (2 * m1 - m2 - m3), k * (2 * (m1 + m2 + m3) - 2)))


def chart_inverse(p, beta):
    x, y = p[0], p[1]
    z = p[2] if len(p) > 2 else 0.0
    return _pack(tuple(1.0 / 3.0 + (UX[i] * x + UY[i] * y + UZ[i] * z) / beta for i in range(3)))


def point(x, y, beta):
    """``m`` with chart coordinates ``(x, y, 0)``."""
    return tuple(1.0 / 3.0 + (UX[i] * x + UY[i] * y) / beta for i in range(3))


def chart_directions(beta) -> tuple[np.ndarray, np.ndarray]:
    """Tangent vectors ``dm/dx`` and ``dm/dy``."""
    return np.array(UX) / beta, np.array(UY) / beta


def in_simplex(v, tol: float = 0.0):
    v = np.asarray(v, dtype=float)
    return np.all(v >= -tol, axis=0)


# ---------------------------------------------------------------------------
# Gamma matrix


def _row_sums(M, g):
    E = [exp(Ma) for Ma in _vec(M)]
    eg = exp(g)
    total = E[0] + E[1] + E[2]
    # S_b = sum_c exp(M_c + g 1{c=b})
    S = [total + (eg - 1.0) * E[b] for b in range(3)]
    return E, eg, S


def gamma_entries(M, g):
    """Row-stochastic ``Gamma[b][a] = exp(M_a + g 1{a=b}) / S_b``."""
    E, eg, S = _row_sums(M, g)
    return [[(eg * E[a] if a == b else E[a]) / S[b] for a in range(3)] for b in range(3)]


def gamma_inverse_entries(M, g):
    E, eg, S = _row_sums(M, g)
    D = eg * eg + eg - 2.0
    Einv = [1.0 / e for e in E]
    return [[((eg + 1.0) * Einv[a] * S[a] if a == b else -Einv[b] * S[a]) / D for a in range(3)] for b in range(3)]


@dataclass(frozen=True)
class GammaMatrix:
    entries: np.ndarray
    inverse_entries: np.ndarray
    determinant_factor: float  # det E = exp(M1+M2+M3)(e^{3g} - 3e^g + 2) in Gamma = D E


def gamma(M, g: float) -> GammaMatrix:
    if not g > 0:
        raise ValueError(f"Gamma^-1 requires g > 0, got {g}")
    M = np.asarray(M, dtype=float)
    return GammaMatrix(
        entries=np.array(gamma_entries(M, g), dtype=float),
        inverse_entries=np.array(gamma_inverse_entries(M, g), dtype=float),
        determinant_factor=gamma_determinant_factor(M, g),
    )


def gamma_determinant_factor(M, g: float) -> float:
    """``exp(M1+M2+M3) (e^{3g} - 3 e^g + 2)``."""
    M = np.asarray(M, dtype=float)
    return float(np.exp(M.sum()) * (np.exp(3 * g) - 3 * np.exp(g) + 2))


# ---------------------------------------------------------------------------
# HS transform


def hs_value(alpha, m, beta, g):
    """``G(m) = beta/2 <m,m> - sum_b alpha_b log sum_a exp(beta m_a + g 1{a=b})``."""
    m = _vec(m)
    alpha = _vec(alpha)
    _, _, S = _row_sums(tuple(beta * mi for mi in m), g)
    quad = 0.5 * beta * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2])
    return quad - (alpha[0] * log(S[0]) + alpha[1] * log(S[1]) + alpha[2] * log(S[2]))


def hs_gradient(alpha, m, beta, g):
    """Gradient in m-space: ``beta (m_a - sum_b alpha_b Gamma_{b,a}(beta m))``."""
    m = _vec(m)
    alpha = _vec(alpha)
    G = gamma_entries(tuple(beta * mi for mi in m), g)
    return _pack(tuple(beta * (m[a] - sum(alpha[b] * G[b][a] for b in range(3))) for a in range(3)))


def hs_hessian(alpha, m, beta, g) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    G = np.array(gamma_entries(beta * m, g))
    H = np.empty((3, 3))
    for b in range(3):
        for a in range(3):
            s = sum(alpha[c] * G[c][a] * ((a == b) - G[c][b]) for c in range(3))
            H[b, a] = beta * ((a == b) - beta * s)
    return H


def _chart_gradient_terms(alpha, m, G, dirs):
    out = []
    for u in dirs:
        um = sum(u[a] * m[a] for a in range(3))
        ug = sum(alpha[b] * sum(u[a] * G[b][a] for a in range(3)) for b in range(3))
        out.append(um - ug)
    return out


def chart_gradient(alpha, m, beta, g):
    """``(dG/dx, dG/dy)`` at ``m``."""
    m = _vec(m)
    alpha = _vec(alpha)
    G = gamma_entries(tuple(beta * mi for mi in m), g)
    return tuple(_chart_gradient_terms(alpha, m, G, (UX, UY)))


def _covariance(alpha, G, u, v):
    total = 0.0
    for c in range(3):
        row = G[c]
        eu = row[0] * u[0] + row[1] * u[1] + row[2] * u[2]
        ev = row[0] * v[0] + row[1] * v[1] + row[2] * v[2]
        euv = row[0] * (u[0] * v[0]) + row[1] * (u[1] * v[1]) + row[2] * (u[2] * v[2])
        total = total + alpha[c] * (euv - eu * ev)
    return total


def chart_hessian_2x2(alpha, m, beta, g):
    """``(G_xx, G_xy, G_yy)`` in the ``(x, y)`` chart block."""
    m = _vec(m)
    alpha = _vec(alpha)
    G = gamma_entries(tuple(beta * mi for mi in m), g)
    gxx = 6.0 / beta - _covariance(alpha, G, UX, UX)
    gxy = -_covariance(alpha, G, UX, UY)
    gyy = 6.0 / beta - _covariance(alpha, G, UY, UY)
    return gxx, gxy, gyy


def chart_hessian(alpha, m, beta, g) -> np.ndarray:
    """Full 3x3 chart Hessian (x, y, z)."""
    m = np.asarray(m, dtype=float)
    H = hs_hessian(alpha, m, beta, g)
    J = np.column_stack([UX, UY, UZ]) / beta
    return J.T @ H @ J


# ---------------------------------------------------------------------------
# catastrophe map


def chi(m, beta, g):
    """End-conditioning for which ``m`` is stationary:
    ``chi_b = sum_a m_a Gamma^{-1}_{a,b}(beta m)``."""
    m = _vec(m)
    E, eg, S = _row_sums(tuple(beta * mi for mi in m), g)
    D = eg * eg + eg - 2.0
    r = [m[a] / E[a] for a in range(3)]
    total = r[0] + r[1] + r[2]
    return _pack(tuple(S[b] * ((eg + 2.0) * r[b] - total) / D for b in range(3)))


def chi_chart(m, beta, g):
    """Chart coordinates ``(u, v)`` of ``chi(m)``; ``v`` is the component
    parallel to the ``m2 = m3`` symmetry axis."""
    a1, a2, a3 = chi(m, beta, g)
    k = beta / 6.0
    return k * SQRT3 * (a3 - a2), k * (2 * a1 - a2 - a3)


def degeneracy_on_manifold(m, beta, g):
    """Chart-Hessian determinant at ``m`` with ``alpha = chi(m)``."""
    alpha = chi(m, beta, g)
    gxx, gxy, gyy = chart_hessian_2x2(alpha, m, beta, g)
    return gxx * gyy - gxy * gxy


# ---------------------------------------------------------------------------
# jets


def jet_eval(func, base, directions, order: int) -> Jet:
    """Taylor expansion of ``func(m)`` at ``m = base`` along ``directions``.

    ``func`` takes a length-3 tuple of jet components. The result's variable
    ``i`` is the coefficient of ``directions[i]``.
    """
    if not 0 <= order <= jets.MAX_ORDER:
        raise ValueError(f"unsupported jet order {order}")
    ts = jets.variables([0.0] * len(directions), order)
    m = tuple(base[a] + sum(t * float(d[a]) for t, d in zip(ts, directions)) for a in range(3))
    return func(m)


def chart_jet(func, x, y, beta, g, order: int, wrt: str = "xy") -> Jet:
    """Jet of ``func(m, beta, g)`` at chart point ``(x, y)`` in the variables
    named by ``wrt`` (any ordered subset of ``"xybg"``)."""
    values = {"x": x, "y": y, "b": beta, "g": g}
    seeded = dict(zip(wrt, jets.variables([values[k] for k in wrt], order)))
    X = seeded.get("x", x)
    Y = seeded.get("y", y)
    B = seeded.get("b", beta)
    Gt = seeded.get("g", g)
    return func(point(X, Y, B), B, Gt)

"""Critical lines of the dynamical phase diagram.

Each line is returned as :class:`CriticalLineSample` records carrying the
auxiliary roots and the residuals of the defining equations. Lines with
explicit parametrisations (SCE, B2B, EW, EU) are evaluated directly;
the others are solved by bracketed 1-D root finding or small Newton
systems whose Jacobians come from Taylor jets.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import jets
from . import potential as P
from .bifurcation import ParameterError, find_stationary_points
from .model import t_of_g
from .roots import NewtonFailure, NoBracketError, all_roots, bracket_scan, edge_brackets, newton, refine

log = logging.getLogger(__name__)

LINES = ("SCE", "NG", "BE", "BU", "ACE", "TPE", "B2B", "MTE", "EW", "EU")
LOG2 = math.log(2.0)
BETA_EW = 4.0 * LOG2
EDGE_MIDPOINT = np.array([0.0, 0.5, 0.5])
VERTEX = np.array([1.0, 0.0, 0.0])


@dataclass(frozen=True)
class CriticalLineSample:
    line: str
    beta: float
    g: float
    aux: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    @property
    def t(self) -> float:
        return t_of_g(self.g) if self.g > 0 else float("inf")

    @property
    def residual_norm(self) -> float:
        return max((abs(v) for v in self.residuals.values()), default=0.0)

    def record(self) -> dict:
        out = {"line": self.line, "beta": self.beta, "g_t": self.g, "t": self.t}
        out.update({k: float(v) for k, v in sorted(self.aux.items())})
        out.update({f"res_{k}": float(v) for k, v in sorted(self.residuals.items())})
        out["residual_norm"] = self.residual_norm
        return out


# ---------------------------------------------------------------------------
# symmetric cusp exit


def sce_helper(s):
    e = np.exp(s)
    a = (s - 1) * e + 4 * s
    return -a + np.sqrt(a * a + 8 * (2 * s + e * e))


def sce_beta(s):
    F = sce_helper(s)
    return 2 * s * (2 * np.exp(s) + F) / (4 * np.exp(s) - F)


def sce_g(s):
    return np.log(0.5 * sce_helper(s) - 1)


def sce_residuals(beta, g, y):
    eg = math.exp(g)
    d = eg + 1 + math.exp(3 * y)
    mf = 6 / beta * y + (eg + 1 - 2 * math.exp(3 * y)) / d
    deg = 6 / beta + 3 * (eg - 1) ** 2 / d**2 - 3 * (eg + 1) / d
    return {"mf": mf, "deg": deg}


def sce_line(s: float) -> CriticalLineSample:
    if not s < 0:
        raise ParameterError(f"SCE parameter must be negative, got {s}")
    beta, g = float(sce_beta(s)), float(sce_g(s))
    return CriticalLineSample("SCE", beta, g, {"s": s, "y": s / 3}, sce_residuals(beta, g, s / 3))


def ng_zero(s):
    """Numerator of ``d beta / d s`` along the SCE line."""
    e = np.exp
    root = np.sqrt(((s - 1) * e(s) + 4 * s) ** 2 + 8 * (2 * s + e(2 * s)))
    num = (
        64 * s**3
        + 64 * s**2
        + s * (s * s + s + 6) * e(3 * s)
        + 4 * s * (5 * s + 6) * e(2 * s)
        - 8 * s * (2 * s - 3) * e(s)
    )
    return num / root - 16 * s * s - s * (s + 2) * e(2 * s) + 4 * s * (s - 2) * e(s) - 8 * s


@lru_cache(maxsize=1)
def ng_point() -> tuple[float, float]:
    """``(s0, beta_NG)``: the fold of the SCE line."""
    brackets = bracket_scan(ng_zero, -10.0, -1e-6, 1000)
    if not brackets:
        raise RuntimeError("no sign change of the NG zero function in [-10, -1e-6]")
    s0 = refine(ng_zero, *brackets[-1], xtol=1e-12)
    return s0, float(sce_beta(s0))


def beta_ng() -> float:
    return ng_point()[1]


def t_ng_zero(y, beta):
    b = beta
    q = b * b + 3 * b * y - 18 * y * y
    return 2 * b * b + 24 * b * y + 72 * y * y - (q - 9 * b) * np.exp(6 * y) - 4 * q * np.exp(3 * y)


def _sce_w(beta, y):
    return 2 * (beta - 3 * y) * np.exp(3 * y) / (beta + 6 * y)


def _sce_roots(beta: float) -> list[float]:
    b_ng = beta_ng()
    if not (b_ng < beta < 3.0):
        raise ParameterError(f"beta must lie in (beta_NG, 3), got {beta}")
    roots = all_roots(lambda y: t_ng_zero(y, beta), -beta / 6 + 1e-12, -1e-12, 1000, xtol=1e-14)
    roots = [y for y in roots if _sce_w(beta, y) > 2]
    if not roots:
        raise ParameterError(f"no SCE root for beta={beta}")
    return roots


def _sce_sample(line, beta, y):
    w = float(_sce_w(beta, y))
    g = math.log(w - 1)
    res = sce_residuals(beta, g, y)
    res["zero"] = float(t_ng_zero(y, beta)) / (beta * beta)
    return CriticalLineSample(line, beta, g, {"y": y, "s": 3 * y, "w": w}, res)


def t_ng(beta: float) -> CriticalLineSample:
    """Entry into the non-Gibbs region: the SCE crossing with the largest
    ``g`` (earliest time). ``w`` decreases from infinity to 2 as ``y``
    runs over ``(-beta/6, 0)``, so this is the smallest admissible root."""
    roots = _sce_roots(beta)
    return _sce_sample("NG", beta, max(roots, key=lambda y: _sce_w(beta, y)))


def sce_exit(beta: float) -> CriticalLineSample:
    """Second crossing of the SCE line at fixed ``beta`` (smallest ``g``);
    the recovery time for ``beta < beta_BE``."""
    roots = _sce_roots(beta)
    if len(roots) < 2:
        raise ParameterError(f"SCE line crossed once at beta={beta}")
    return _sce_sample("SCE", beta, min(roots, key=lambda y: _sce_w(beta, y)))


# ---------------------------------------------------------------------------
# butterfly exit / unfolding


def _v(m, B, G):
    return P.chi_chart(m, B, G)[1]


def _unfolding_function(y, beta, g):
    """``d^2 v/dx^2 + dv/dy * gamma''(0)`` at the symmetric point ``(0, y)``;
    vectorised over arrays."""
    fj = P.chart_jet(P.degeneracy_on_manifold, np.zeros_like(y), y, beta, g, 2)
    vj = P.chart_jet(_v, np.zeros_like(y), y, beta, g, 2)
    gamma_dd = -fj.derivative((2, 0)) / fj.derivative((0, 1))
    return vj.derivative((2, 0)) + vj.derivative((0, 1)) * gamma_dd


def be_function(s):
    s = np.asarray(s, dtype=float)
    return _unfolding_function(s / 3, sce_beta(s), sce_g(s))


def _largest_root(f_vec, f_scalar, a, b, n=1000):
    xs = np.linspace(a, b, n + 1)
    with np.errstate(all="ignore"):
        vals = np.asarray(f_vec(xs), dtype=float)
    ok = np.isfinite(vals[:-1]) & np.isfinite(vals[1:])
    change = ok & (np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    for i in np.flatnonzero(change)[::-1]:
        r = refine(f_scalar, xs[i], xs[i + 1], xtol=1e-13)
        scale = max(abs(vals[i]), abs(vals[i + 1]), 1.0)
        if abs(f_scalar(r)) < 1e-6 * scale:  # reject poles
            return r
    raise NoBracketError("no root found")


@lru_cache(maxsize=1)
def be_point() -> tuple[float, float, float]:
    """``(s0, beta_BE, g_BE)``."""
    s0 = _largest_root(be_function, lambda s: float(be_function(np.array([s]))[0]), -10.0, -1e-6)
    return s0, float(sce_beta(s0)), float(sce_g(s0))


def beta_be() -> float:
    return be_point()[1]


def be_sample() -> CriticalLineSample:
    s0, beta, g = be_point()
    res = sce_residuals(beta, g, s0 / 3)
    res["zero"] = float(be_function(np.array([s0]))[0])
    return CriticalLineSample("BE", beta, g, {"s": s0, "y": s0 / 3}, res)


def bu_H(beta, s):
    b, e = beta, np.exp
    H1 = b * e(2 * s) - s * e(2 * s) + 4 * b * e(s) - 4 * s * e(s) + b + 2 * s - 3 * e(2 * s) - 3 * e(s)
    H2 = (
        (b * b - 2 * (b - 3) * s + s * s - 6 * b + 9) * e(4 * s)
        + 2 * (4 * b * b - (8 * b - 9) * s + 4 * s * s - 9 * b - 9) * e(3 * s)
        + 3 * (6 * b * b - 2 * (5 * b - 6) * s + 4 * s * s - 18 * b + 3) * e(2 * s)
        + 2 * (4 * b * b + 2 * (2 * b - 15) * s - 8 * s * s - 15 * b) * e(s)
        + b * b
        + 4 * b * s
        + 4 * s * s
    )
    return H1 + np.sqrt(H2), H2


def bu_w(beta, s):
    H, _ = bu_H(beta, s)
    return H / (6 * np.exp(s))


def bu_function(s, beta):
    s = np.asarray(s, dtype=float)
    with np.errstate(all="ignore"):
        w = bu_w(beta, s)
        g = np.where(w > 2, np.log(w - 1), np.nan)
        return _unfolding_function(s / 3, beta, g)


def bu_line(beta: float) -> CriticalLineSample:
    b_be = beta_be()
    if not (b_be < beta < 3.0):
        raise ParameterError(f"beta must lie in (beta_BE, 3), got {beta}")
    f_scalar = lambda s: float(bu_function(np.array([s]), beta)[0])  # noqa: E731
    try:
        s = _largest_root(lambda ss: bu_function(ss, beta), f_scalar, -beta / 2 + 1e-9, -1e-9)
    except NoBracketError as exc:
        raise ParameterError(f"no butterfly root at beta={beta}") from exc
    H, H2 = bu_H(beta, s)
    if H2 < 0:
        raise ParameterError("H2 < 0 at the butterfly root")
    w = float(H / (6 * math.exp(s)))
    g = math.log(w - 1)
    m = P.point(0.0, s / 3, beta)
    gxx, _, _ = P.chart_hessian_2x2(P.chi(m, beta, g), m, beta, g)
    res = {"zero": f_scalar(s), "gxx": float(gxx)}
    return CriticalLineSample("BU", beta, g, {"s": s, "y": s / 3, "w": w}, res)


# ---------------------------------------------------------------------------
# asymmetric cusp exit


def _ace_system(x, y, beta, g):
    """Residuals ``(f, v + beta/6, v_x f_y - v_y f_x)`` and their Jacobian
    in ``(x, y, beta, g)``."""
    fj = P.chart_jet(P.degeneracy_on_manifold, x, y, beta, g, 2, wrt="xybg")
    vj = P.chart_jet(_v, x, y, beta, g, 2, wrt="xybg")
    fg, vg = fj.gradient(), vj.gradient()
    fh, vh = fj.hessian(), vj.hessian()
    F = np.array([fj.value, vj.value + beta / 6, vg[0] * fg[1] - vg[1] * fg[0]], dtype=float)
    J = np.empty((3, 4))
    J[0] = fg
    J[1] = vg
    J[1, 2] += 1.0 / 6.0
    for k in range(4):
        J[2, k] = vh[0][k] * fg[1] + vg[0] * fh[1][k] - vh[1][k] * fg[0] - vg[1] * fh[0][k]
    return F, J


def _ace_residual(free: str, fixed_name: str, fixed_value: float):
    """Newton residual in the unknowns ``free`` with the third equation
    divided by ``x``; this removes the symmetric branch ``x = 0``."""
    idx = ["xybg".index(c) for c in free]

    def residual(u):
        vals = dict(zip(free, u))
        vals[fixed_name] = fixed_value
        x = vals["x"]
        F, J = _ace_system(vals["x"], vals["y"], vals["b"], vals["g"])
        J = J.copy()
        J[2] = J[2] / x
        J[2, 0] -= F[2] / (x * x)
        F = F.copy()
        F[2] /= x
        return F, J[:, idx]

    return residual


@lru_cache(maxsize=1)
def ace_trace(step: float = 0.002) -> np.ndarray:
    """The ACE curve as rows ``(x, y, beta, g, alpha_2)`` from the BE point
    to the simplex vertex, by continuation in ``x``."""
    s0, b0, g0 = be_point()
    u = np.array([s0 / 3, b0, g0])
    rows = []
    x = step
    while x < 1.0:
        u = newton(_ace_residual("ybg", "x", x), u, tol=1e-12)
        y, b, g = u
        a2 = float(P.chi(P.point(x, y, b), b, g)[1])
        rows.append((x, y, b, g, a2))
        if a2 < 0:
            break
        x += step
    else:
        raise RuntimeError("ACE continuation did not reach the simplex vertex")
    # end point: cusp at the vertex, alpha_2 = 0
    x_end = refine(lambda xx: _ace_alpha2(xx, rows), rows[-2][0], rows[-1][0], xtol=1e-13)
    u = newton(_ace_residual("ybg", "x", x_end), np.array(rows[-2][1:4]), tol=1e-12)
    rows[-1] = (x_end, *u, 0.0)
    return np.array(rows)


def _ace_alpha2(x, rows):
    u = np.array(rows[-2][1:4])
    u = newton(_ace_residual("ybg", "x", x), u, tol=1e-12)
    return float(P.chi(P.point(x, u[0], u[1]), u[1], u[2])[1])


def _ace_sample(x, y, beta, g):
    F, _ = _ace_system(x, y, beta, g)
    m = P.point(x, y, beta)
    alpha = np.asarray(P.chi(m, beta, g))
    res = {"deg": F[0], "edge": F[1], "cusp": F[2]}
    res = {k: float(v) for k, v in res.items()}
    return CriticalLineSample(
        "ACE", float(beta), float(g), {"x": float(x), "y": float(y), "alpha_2": float(alpha[1])}, res
    )


def ace_range() -> tuple[float, float]:
    """Realised ``g`` range of the ACE line (vertex end, BE end)."""
    tr = ace_trace()
    return float(tr[-1, 3]), float(be_point()[2])


def ace_line(g: float) -> CriticalLineSample:
    lo, hi = ace_range()
    if not (lo <= g < hi):
        raise ParameterError(f"g={g} outside the ACE range ({lo}, {hi})")
    tr = ace_trace()
    gs = tr[::-1, 3]
    seed = [np.interp(g, gs, tr[::-1, k]) for k in (0, 1, 2)]
    u = newton(_ace_residual("xyb", "g", g), seed, tol=1e-12)
    return _ace_sample(u[0], u[1], u[2], g)


def t_ace(beta: float) -> CriticalLineSample:
    """ACE crossing at fixed ``beta`` on the branch leaving the BE point."""
    tr = ace_trace()
    top = int(np.argmax(tr[:, 2]))
    b_be = be_point()[1]
    if not (b_be < beta <= tr[top, 2]):
        raise ParameterError(f"beta={beta} outside the ACE range ({b_be}, {tr[top, 2]})")
    rise = tr[: top + 1]
    seed = [np.interp(beta, rise[:, 2], rise[:, k]) for k in (0, 1, 3)]
    u = newton(_ace_residual("xyg", "b", beta), seed, tol=1e-12)
    return _ace_sample(u[0], u[1], beta, u[2])


# ---------------------------------------------------------------------------
# triple point exit


def tpe_w(beta, y):
    return 2 * (beta - 3 * y) * jets.exp(3 * y) / (beta + 6 * y)


def _tpe_residual(beta):
    def residual(u):
        X, Y, YP = jets.variables(list(u), 1)
        G = jets.log(tpe_w(beta, YP) - 1.0)
        m = P.point(X, Y, beta)
        mp = P.point(0.0 * X, YP, beta)
        depth = P.hs_value(EDGE_MIDPOINT, m, beta, G) - P.hs_value(EDGE_MIDPOINT, mp, beta, G)
        cx, cy = P.chi_chart(m, beta, G)
        F = [depth, cx, cy + beta / 6]
        return (
            np.array([f.value for f in F], dtype=float),
            np.array([f.gradient() for f in F], dtype=float),
        )

    return residual


def _tpe_depth(yp, beta):
    """Lowest asymmetric minimum minus the symmetric minimum at ``(0, yp)``
    for ``alpha`` the edge midpoint, or NaN when either is missing."""
    w = float(tpe_w(beta, yp))
    if not w > 2:
        return float("nan"), None
    g = math.log(w - 1)
    pts = find_stationary_points(EDGE_MIDPOINT, beta, g, per_edge=24)
    ms = np.array(P.point(0.0, yp, beta))
    sym = [p for p in pts if p.kind == "minimum" and np.max(np.abs(np.array(p.m) - ms)) < 1e-6]
    asym = [p for p in pts if p.kind == "minimum" and p.m[2] - p.m[1] > 1e-7]
    if not sym or not asym:
        return float("nan"), None
    return asym[0].value - sym[0].value, asym[0]


def _tpe_seed(beta: float, scan: int = 40):
    ys = np.linspace(-beta / 6 + 1e-6, -1e-6, scan + 1)
    vals = [_tpe_depth(y, beta)[0] for y in ys]
    f = lambda y: _tpe_depth(y, beta)[0]  # noqa: E731
    brackets = edge_brackets(f, ys, np.array(vals), want=lambda v, _: v < 0)
    if not brackets:
        raise ParameterError(f"no triple point exit found at beta={beta}")
    yp = refine(f, *brackets[-1], xtol=1e-10)
    _, p = _tpe_depth(yp, beta)
    x, y, _ = P.chart(p.m, beta)
    return np.array([x, y, yp])


TPE_ANCHOR = 2.7


@lru_cache(maxsize=1)
def _tpe_anchor() -> tuple:
    return tuple(newton(_tpe_residual(TPE_ANCHOR), _tpe_seed(TPE_ANCHOR), tol=1e-12))


def _tpe_continue(beta: float, step: float = 0.004) -> np.ndarray:
    """Seed at ``beta`` by continuation from the scanned anchor solution.
    Near ``beta_BE`` the coexistence window is too narrow to scan."""
    u = np.array(_tpe_anchor())
    n = max(1, int(math.ceil(abs(beta - TPE_ANCHOR) / step)))
    for b in np.linspace(TPE_ANCHOR, beta, n + 1)[1:]:
        u = newton(_tpe_residual(b), u, tol=1e-12)
    return u


def tpe_line(beta: float, seed=None) -> CriticalLineSample:
    if not (beta_be() < beta < BETA_EW):
        raise ParameterError(f"beta must lie in (beta_BE, 4 log 2), got {beta}")
    if seed is None:
        try:
            seed = _tpe_continue(beta)
        except NewtonFailure as exc:
            raise ParameterError(f"TPE continuation failed at beta={beta}") from exc
    u = newton(_tpe_residual(beta), seed, tol=1e-12)
    x, y, yp = (float(v) for v in u)
    F, _ = _tpe_residual(beta)(u)
    m = np.asarray(P.point(x, y, beta))
    mp = np.asarray(P.point(0.0, yp, beta))
    if not (m[0] <= m[1] <= m[2] and mp[0] <= mp[1] <= mp[2]):
        raise ParameterError("TPE solution left the fundamental cell")
    w = float(tpe_w(beta, yp))
    aux = {"x": x, "y": y, "y_prime": yp, "w": w}
    res = {"depth": F[0], "alpha_x": F[1], "alpha_y": F[2]}
    return CriticalLineSample("TPE", beta, math.log(w - 1), aux, res)


# ---------------------------------------------------------------------------
# beak-to-beak


def b2b_cubic_coefficients(s: float) -> np.ndarray:
    """Coefficients (highest degree first) of the cubic in ``w``."""
    e = math.exp
    return np.array(
        [
            e(3 * s) - e(s),
            -(6 * s * e(2 * s) + e(4 * s) + 2 * e(3 * s) - 3 * e(2 * s) - e(s) - 2),
            6 * s * e(2 * s) + 2 * e(4 * s) + 3 * e(3 * s) - 3 * e(2 * s) - 2 * e(s),
            -e(4 * s) - 2 * e(3 * s),
        ]
    )


def b2b_domain_function(s):
    e = np.exp
    return -12 * s * e(2 * s) - e(4 * s) + 4 * e(3 * s) + 6 * e(2 * s) - 8 * e(s) + 8


@lru_cache(maxsize=1)
def b2b_s_star() -> float:
    brackets = bracket_scan(b2b_domain_function, 1e-6, 5.0, 1000)
    if len(brackets) != 1:
        raise RuntimeError(f"expected one positive root, found {len(brackets)}")
    return refine(b2b_domain_function, *brackets[0], xtol=1e-14)


def shifted_cubic_coefficients(s: float) -> np.ndarray:
    """Coefficients of the cubic in ``theta = w - 2`` (highest first)."""
    p = np.poly1d(b2b_cubic_coefficients(s))
    return np.poly1d(p(np.poly1d([1.0, 2.0]))).coeffs


def b2b_w(s: float) -> float:
    coeffs = b2b_cubic_coefficients(s)
    roots = np.roots(coeffs)
    real = sorted(r.real for r in roots if abs(r.imag) < 1e-9 * max(1.0, abs(r)) and r.real > 2)
    if len(real) != 1:
        raise ParameterError(f"cubic has {len(real)} roots above 2 at s={s}")
    f = lambda w: float(np.polyval(coeffs, w))  # noqa: E731
    r = real[0]
    h = 1e-6 * max(1.0, r)
    lo, hi = max(2.0, r - h), r + h
    while f(lo) * f(hi) > 0:
        h *= 4
        lo, hi = max(2.0, r - h), r + h
    return refine(f, lo, hi, xtol=1e-15)


def b2b_beta(s, w):
    e2 = np.exp(2 * s)
    return (2 * (s - 2) * w + (s + 2) * (w - 1) * e2) / ((w - 1) * e2 - w)


def b2b_residuals(beta, g, y):
    eg = math.exp(g)
    r1 = (
        -(beta + 6 * y - 2) * (eg + 1) * math.exp(-3 * y) - (beta - 3 * y - 1) * math.exp(g + 3 * y) + eg * (eg + 1) + 2
    )
    r2 = (beta + 6 * y - 4) * (eg + 1) * math.exp(-3 * y) - (beta - 3 * y - 2) * math.exp(g + 3 * y)
    return {"eq1": r1, "eq2": r2}


def b2b_line(s: float) -> CriticalLineSample:
    if not s > b2b_s_star():
        raise ParameterError(f"s must exceed s_*={b2b_s_star()}, got {s}")
    w = b2b_w(s)
    beta, g = float(b2b_beta(s, w)), math.log(w - 1)
    res = b2b_residuals(beta, g, s / 3)
    coeffs = b2b_cubic_coefficients(s)
    res["cubic"] = float(np.polyval(coeffs, w) / np.polyval(np.abs(coeffs), w))
    return CriticalLineSample("B2B", beta, g, {"s": s, "y": s / 3, "w": w}, res)


def _invert_s(line_fn, beta, lo, hi, n=400):
    f = lambda s: line_fn(s).beta - beta  # noqa: E731
    for a, b in bracket_scan(f, lo, hi, n):
        return line_fn(refine(f, a, b, xtol=1e-14))
    raise ParameterError(f"beta={beta} not reached on ({lo}, {hi})")


def t_b2b(beta: float) -> CriticalLineSample:
    return _invert_s(b2b_line, beta, b2b_s_star() + 1e-9, 4.0)


# ---------------------------------------------------------------------------
# Maxwell triangle exit


def mte_w(beta, y):
    return 1 + (beta + 6 * y) * jets.exp(-3 * y) / (beta - 3 * y)


def mte_eq1(beta, y, yp):
    return (beta + 6 * y) * (beta - 3 * yp) * math.exp(-3 * y) - (beta + 6 * yp) * (beta - 3 * y) * math.exp(-3 * yp)


def mte_eq2(beta, y, yp):
    """Equal depth at ``alpha = (1, 0, 0)`` with ``t`` eliminated."""
    b = beta
    arg = (2 * (b - 3 * y) * math.exp(3 * y) + (b + 6 * y) * math.exp(3 * yp)) / (3 * b)
    return -2 * y - yp - 3 / b * (yp * yp - y * y) + math.log(arg)


def _mte_residual(beta):
    def residual(u):
        Y, YP = jets.variables(list(u), 1)
        W = mte_w(beta, Y)
        G = jets.log(W - 1.0)
        d = P.hs_value(VERTEX, P.point(0.0 * Y, Y, beta), beta, G) - P.hs_value(
            VERTEX, P.point(0.0 * YP, YP, beta), beta, G
        )
        F = [W - mte_w(beta, YP), d]
        return np.array([f.value for f in F]), np.array([f.gradient() for f in F])

    return residual


def _mte_closed_seed(beta, w):
    # the solutions satisfy w = 1 + 2 exp(-beta/4) and y + y' = beta/6
    target = 1 + 2 * math.exp(-beta / 4)
    roots = all_roots(lambda y: w(y) - target, -beta / 6 + 1e-12, beta / 3 - 1e-12, n=400, xtol=1e-15)
    for a in roots:
        for b in roots:
            if b - a > 1e-6 and abs(a + b - beta / 6) < 1e-8:
                return np.array([a, b])
    return None


def _mte_seed(beta):
    from scipy.optimize import minimize_scalar

    w = lambda y: float(mte_w(beta, y))  # noqa: E731
    ymin = minimize_scalar(w, bounds=(0.0, beta / 3), method="bounded", options={"xatol": 1e-12}).x
    seed = _mte_closed_seed(beta, w)
    if seed is not None:
        return seed

    def partner(y):
        return refine(lambda yp: w(yp) - w(y), ymin, beta / 3 - 1e-12, xtol=1e-15)

    def depth(y):
        yp = partner(y)
        g = math.log(w(y) - 1)
        return float(
            P.hs_value(VERTEX, P.point(0.0, y, beta), beta, g) - P.hs_value(VERTEX, P.point(0.0, yp, beta), beta, g)
        )

    lo = -beta / 6 + 1e-9
    ys = np.linspace(lo, ymin - 1e-4, 200)
    vals = []
    for y in ys:
        try:
            vals.append(depth(y) if w(y) > 2 else np.nan)
        except ValueError:
            vals.append(np.nan)
    for i in range(len(ys) - 2, -1, -1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0:
            y = refine(depth, ys[i], ys[i + 1], xtol=1e-14)
            return np.array([y, partner(y)])
    raise ParameterError(f"only the diagonal MTE solution found at beta={beta}")


def mte_line(beta: float, seed=None) -> CriticalLineSample:
    if not (8.0 / 3.0 < beta < BETA_EW):
        raise ParameterError(f"beta must lie in (8/3, 4 log 2), got {beta}")
    if seed is None:
        seed = _mte_seed(beta)
    y, yp = (float(v) for v in newton(_mte_residual(beta), seed, tol=1e-13))
    if abs(y - yp) < 1e-6:
        raise ParameterError("MTE solver collapsed onto the diagonal")
    w = float(mte_w(beta, y))
    F, _ = _mte_residual(beta)(np.array([y, yp]))
    res = {
        "eq1": mte_eq1(beta, y, yp) / beta**2,
        "eq2": mte_eq2(beta, y, yp),
        "w_diff": F[0],
        "depth": F[1],
    }
    return CriticalLineSample("MTE", beta, math.log(w - 1), {"y": y, "y_prime": yp, "w": w}, res)


# ---------------------------------------------------------------------------
# Ellis-Wang and elliptic umbilic


def ew_zero(w, s):
    e = np.exp(s)
    frac = (e - 1) * (w * e - e + w) / ((w + e) * (w * e - e + 2))
    return s * (1 + frac) + np.log((w + 1) ** 3 / ((w + e) ** 2 * (w * e - e + 2)))


def ew_beta(s, w):
    e = math.exp(s)
    return s * (e * (w - 1) + 2) * (e + w) / ((e - 1) * (w * e + w - e))


def ew_residuals(beta, g, y):
    eg, e3 = math.exp(g), math.exp(3 * y)
    r1 = 3 * y / beta + 1 / (e3 * eg + 2) - e3 / (e3 + eg + 1)
    r2 = 3 * y * (1 + 3 * y / beta) + math.log((eg + 2) ** 3 / ((eg + 1 + e3) ** 2 * (e3 * eg + 2)))
    return {"eq1": r1, "eq2": r2}


def ew_w(s: float, w_max: float = 1e4) -> float:
    grid = 2.0 + np.geomspace(1e-12, w_max, 2000)
    vals = ew_zero(grid, s)
    idx = np.flatnonzero(np.isfinite(vals[:-1]) & (vals[:-1] * vals[1:] < 0))
    if len(idx) != 1:
        raise ParameterError(f"expected one EW root above 2 at s={s}, found {len(idx)}")
    i = idx[0]
    return refine(lambda w: float(ew_zero(w, s)), grid[i], grid[i + 1], xtol=1e-15)


def ew_line(s: float) -> CriticalLineSample:
    if not s > 2 * LOG2:
        raise ParameterError(f"s must exceed 2 log 2, got {s}")
    w = ew_w(s)
    beta, g = ew_beta(s, w), math.log(w - 1)
    res = ew_residuals(beta, g, s / 3)
    return CriticalLineSample("EW", beta, g, {"s": s, "y": s / 3, "w": w}, res)


def t_ew(beta: float) -> CriticalLineSample:
    if not (BETA_EW < beta <= 3.0):
        raise ParameterError(f"beta must lie in (4 log 2, 3], got {beta}")
    return _invert_s(ew_line, beta, 2 * LOG2 + 1e-9, 3.0, n=200)


def eu_w(beta):
    return beta - 1 + math.sqrt(beta * (beta - 3))


def eu_line(beta: float) -> CriticalLineSample:
    if not beta >= 3:
        raise ParameterError(f"beta must be at least 3, got {beta}")
    w = eu_w(beta)
    g = math.log(w - 1)
    centre = [1 / 3] * 3
    hxx, hxy, hyy = P.chart_hessian_2x2(centre, centre, beta, g)
    res = {"hxx": float(hxx), "hxy": float(hxy), "hyy": float(hyy)}
    return CriticalLineSample("EU", beta, g, {"w": w}, res)


def eu_reference_ratio(beta: float) -> float:
    """``A1(beta) / A2(beta)`` from the closed-form polynomials."""
    b = beta
    r = math.sqrt(b * (b - 3))
    B = (
        262144 * b**9
        - 3604480 * b**8
        + 20840448 * b**7
        - 65802240 * b**6
        + 123282432 * b**5
        - 139366656 * b**4
        + 92378880 * b**3
        - 33102432 * b**2
        + 5380020 * b
        - 255879
    )
    A1 = (
        7077888 * b**10
        - 107937792 * b**9
        + 700710912 * b**8
        - 2523156480 * b**7
        + 5502422016 * b**6
        - 7445737728 * b**5
        + 6152433408 * b**4
        - 2930719968 * b**3
        + 712130940 * b**2
        - 67493007 * b
        + 1062882
        + 27 * B * r
    )
    C = (
        1048576 * b**11
        - 14942208 * b**10
        + 90243072 * b**9
        - 300810240 * b**8
        + 603832320 * b**7
        - 747242496 * b**6
        + 560431872 * b**5
        - 240185088 * b**4
        + 51963120 * b**3
        - 4330260 * b**2
        + 59049 * b
    )
    A2 = (
        1048576 * b**12
        - 16515072 * b**11
        + 111476736 * b**10
        - 421134336 * b**9
        + 975421440 * b**8
        - 1426553856 * b**7
        + 1307674368 * b**6
        - 720555264 * b**5
        + 218245104 * b**4
        - 30311820 * b**3
        + 1240029 * b**2
        + C * r
    )
    return A1 / A2


@dataclass(frozen=True)
class EUTaylor:
    beta: float
    x2y: float
    y3: float
    z2: float
    constant: float
    reference_ratio: float


def eu_taylor(beta: float) -> EUTaylor:
    """Third-order chart Taylor coefficients of ``G`` at the centre for
    ``alpha`` uniform on the EU line."""
    if not beta >= 3:
        raise ParameterError(f"beta must be at least 3, got {beta}")
    w = eu_w(beta)
    g = math.log(w - 1) if w > 2 else 0.0
    X, Y, Z = jets.variables([0.0, 0.0, 0.0], 3)
    m = P.chart_inverse((X, Y, Z), beta)
    J = P.hs_value([1 / 3] * 3, m, beta, g)
    c = lambda e: float(J.coefficient(e))  # noqa: E731
    return EUTaylor(beta, c((2, 1, 0)), c((0, 3, 0)), c((0, 0, 2)), c((0, 0, 0)), eu_reference_ratio(beta))


# ---------------------------------------------------------------------------
# beta_*


def _tpe_minus_b2b(beta: float) -> float:
    return tpe_line(beta).t - t_b2b(beta).t


@lru_cache(maxsize=1)
def beta_star() -> float:
    lo, hi = 8.0 / 3.0 + 1e-6, BETA_EW - 1e-6
    brackets = bracket_scan(_tpe_minus_b2b, lo, hi, 10)
    if len(brackets) != 1:
        raise RuntimeError(f"expected one TPE/B2B crossing, found {len(brackets)}")
    return refine(_tpe_minus_b2b, *brackets[0], xtol=1e-10)


# ---------------------------------------------------------------------------
# sampling


@lru_cache(maxsize=1)
def _sce_s_range(beta_max: float = 3.0) -> tuple[float, float]:
    """Parameter interval on which the SCE line has ``beta <= beta_max``.
    The end near ``s = 0`` (where ``g -> 0``) is cut at ``-0.01`` to avoid
    cancellation in the residuals."""
    s0 = ng_point()[0]
    f = lambda s: float(sce_beta(s)) - beta_max  # noqa: E731
    return refine(f, -10.0, s0, xtol=1e-14), -0.01


@lru_cache(maxsize=4)
def _b2b_s_at(beta: float) -> float:
    return t_b2b(beta).aux["s"]


def line_domain(name: str) -> tuple[str, float, float]:
    """``(parameter, lo, hi)`` with parameter one of ``s``, ``g``, ``beta``.
    Ranges are open intervals shrunk slightly away from their singular
    ends and clipped to ``beta <= 3`` (``beta <= 5`` for EU)."""
    name = name.upper()
    if name == "SCE":
        return ("s", *_sce_s_range())
    if name == "NG":
        return "beta", beta_ng() + 1e-4, 3.0 - 1e-6
    if name == "BU":
        return "beta", beta_be() + 1e-4, 3.0 - 1e-6
    if name == "ACE":
        lo, hi = ace_range()
        return "g", lo, hi - 1e-6
    if name == "TPE":
        return "beta", beta_be() + 1e-2, BETA_EW - 1e-3
    if name == "B2B":
        return "s", b2b_s_star() + 1e-3, _b2b_s_at(3.0)
    if name == "MTE":
        return "beta", 8.0 / 3.0 + 1e-5, BETA_EW - 1e-4
    if name == "EW":
        return "s", 2 * LOG2 + 1e-4, t_ew(3.0).aux["s"]
    if name == "EU":
        return "beta", 3.0, 5.0
    if name == "BE":
        s0, b, _ = be_point()
        return "s", s0, s0
    raise ParameterError(f"unknown line {name!r}")


_EXPLICIT = {"SCE": sce_line, "NG": t_ng, "BU": bu_line, "ACE": ace_line, "B2B": b2b_line, "EW": ew_line, "EU": eu_line}
_CONTINUED = {"TPE": (tpe_line, ("x", "y", "y_prime")), "MTE": (mte_line, ("y", "y_prime"))}
_FAILURES = (ParameterError, NewtonFailure, NoBracketError)


def evaluate_line(name: str, params) -> tuple[list[CriticalLineSample], list[tuple[float, str]]]:
    """Evaluate a line at each parameter value. TPE and MTE are traversed
    downwards in ``beta`` with each solution seeding the next."""
    name = name.upper()
    if name == "BE":
        return [be_sample()], []
    samples, failures = [], []
    if name in _CONTINUED:
        step, key = _CONTINUED[name]
        seed = None
        for p in sorted((float(v) for v in params), reverse=True):
            try:
                smp = step(p, seed)
            except _FAILURES:
                try:
                    smp = step(p)
                except _FAILURES as exc:
                    failures.append((p, str(exc)))
                    seed = None
                    continue
            samples.append(smp)
            seed = np.array([smp.aux[k] for k in key])
        samples.sort(key=lambda r: r.beta)
        return samples, failures
    if name not in _EXPLICIT:
        raise ParameterError(f"unknown line {name!r}")
    for p in params:
        try:
            samples.append(_EXPLICIT[name](float(p)))
        except _FAILURES as exc:
            failures.append((float(p), str(exc)))
    return samples, failures


def sample_line(name: str, n: int = 200, lo: float | None = None, hi: float | None = None):
    """``n`` equally spaced samples over the line's natural parameter range
    (see :func:`line_domain`), or over ``[lo, hi]``."""
    _, a, b = line_domain(name)
    a = a if lo is None else lo
    b = b if hi is None else hi
    return evaluate_line(name, np.linspace(a, b, n))


# ---------------------------------------------------------------------------
# phase diagram


@dataclass
class PhaseDiagram:
    """Lines in ``(1/beta, g/beta)`` coordinates."""

    lines: dict[str, np.ndarray]
    samples: dict[str, list[CriticalLineSample]]
    marks: dict[str, float]
    ng_boundary: np.ndarray
    ng_pieces: dict[str, np.ndarray]
    junction_gaps: dict[str, float]
    failures: dict[str, list]


def _coords(beta, g):
    return np.column_stack(
        [1.0 / np.asarray(beta, dtype=float), np.asarray(g, dtype=float) / np.asarray(beta, dtype=float)]
    )


def marked_temperatures() -> dict[str, float]:
    return {
        "beta_NG": beta_ng(),
        "beta_BE": beta_be(),
        "8/3": 8.0 / 3.0,
        "beta_*": beta_star(),
        "4log2": BETA_EW,
        "3": 3.0,
    }


def ng_boundary_pieces(n: int = 200) -> dict[str, np.ndarray]:
    """Boundary of the non-Gibbs region as consecutive pieces, each an
    ``(N, 2)`` array of ``(beta, g)``: the SCE entry branch (``s < s0``)
    from ``beta = 3`` down to its fold, the SCE exit branch up to BE, the ACE trace to the simplex
    vertex, and MTE down to ``g = 0`` at ``4 log 2``."""
    s_lo, _ = _sce_s_range()
    s0 = ng_point()[0]
    s_be = be_point()[0]
    entry = np.linspace(s_lo, s0, n)
    exit_ = np.linspace(s0, s_be, n)
    sce_entry = np.column_stack([sce_beta(entry), sce_g(entry)])
    sce_exit_ = np.column_stack([sce_beta(exit_), sce_g(exit_)])
    tr = ace_trace()
    ace = np.vstack([[be_point()[1], be_point()[2]], tr[:, 2:4]])
    mte, _ = evaluate_line("MTE", np.linspace(8.0 / 3.0 + 1e-6, BETA_EW - 1e-4, n))
    mte_arr = np.array([[r.beta, r.g] for r in mte])
    return {"SCE entry": sce_entry, "SCE exit": sce_exit_, "ACE": ace, "MTE": mte_arr}


def junction_gaps(pieces: dict[str, np.ndarray]) -> dict[str, float]:
    """Gap in ``g/beta`` between consecutive pieces. The ACE end points
    are replaced by Newton solutions close to the limits, since the trace
    is stored on a grid in ``x``."""
    s_be, b_be, g_be = be_point()
    u = newton(_ace_residual("ybg", "x", 1e-3), np.array([s_be / 3, b_be, g_be]), tol=1e-11)
    ace_start = np.array([u[1], u[2]])
    ace_end = ace_trace()[-1, 2:4]
    keys = list(pieces)
    gaps = {}
    gaps["SCE entry->SCE exit"] = abs(
        pieces[keys[0]][-1, 1] / pieces[keys[0]][-1, 0] - pieces[keys[1]][0, 1] / pieces[keys[1]][0, 0]
    )
    sce_end = pieces["SCE exit"][-1]
    gaps["SCE->ACE"] = abs(sce_end[1] / sce_end[0] - ace_start[1] / ace_start[0])
    mte_start = pieces["MTE"][0]
    gaps["ACE->MTE"] = abs(ace_end[1] / ace_end[0] - mte_start[1] / mte_start[0])
    return gaps


DIAGRAM_LINES = tuple(name for name in LINES if name != "EU")


def phase_diagram(beta_grid=None, n: int = 200, lines=DIAGRAM_LINES) -> PhaseDiagram:
    """Assemble all lines. ``beta_grid`` is used for the lines indexed by
    ``beta``; the others are sampled over ``n`` parameter values. Failures
    are recorded per line and do not stop the assembly. EU lives at
    ``beta >= 3`` and meets the diagram only at ``(3, 0)``, so it is left
    out by default."""
    if beta_grid is not None:
        beta_grid = np.asarray(beta_grid, dtype=float)
        if np.any(beta_grid <= 0) or np.any(beta_grid > 3):
            raise ParameterError("beta grid must lie in (0, 3]")
    out_lines, out_samples, failures = {}, {}, {}
    for name in lines:
        name = name.upper()
        kind, lo, hi = line_domain(name)
        if kind == "beta" and beta_grid is not None:
            params = beta_grid[(beta_grid >= lo) & (beta_grid <= hi)]
        else:
            params = np.linspace(lo, hi, n)
        try:
            smp, fail = evaluate_line(name, params)
        except _FAILURES + (RuntimeError,) as exc:
            smp, fail = [], [(float("nan"), str(exc))]
        out_samples[name] = smp
        failures[name] = fail
        out_lines[name] = _coords([r.beta for r in smp], [r.g for r in smp]) if smp else np.empty((0, 2))
    pieces = ng_boundary_pieces(n)
    boundary = np.vstack([_coords(p[:, 0], p[:, 1]) for p in pieces.values()])
    return PhaseDiagram(
        lines=out_lines,
        samples=out_samples,
        marks=marked_temperatures(),
        ng_boundary=boundary,
        ng_pieces={k: _coords(p[:, 0], p[:, 1]) for k, p in pieces.items()},
        junction_gaps=junction_gaps(pieces),
        failures=failures,
    )

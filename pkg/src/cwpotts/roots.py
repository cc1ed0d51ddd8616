"""One-dimensional bracketing and small Newton systems."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)


class NoBracketError(ValueError):
    """No sign change of the target function was found in the scan range."""


class NewtonFailure(RuntimeError):
    pass


def bracket_scan(f: Callable[[float], float], a: float, b: float, n: int = 1000) -> list[tuple[float, float]]:
    """Subintervals of ``[a, b]`` (``n`` uniform cells) with a sign change.

    Cells where ``f`` is not finite at an endpoint are skipped, which keeps
    poles from masquerading as roots.
    """
    xs = np.linspace(a, b, n + 1)
    with np.errstate(all="ignore"):
        fs = np.array([f(x) for x in xs], dtype=float)
    out = []
    for i in range(n):
        f0, f1 = fs[i], fs[i + 1]
        if not (np.isfinite(f0) and np.isfinite(f1)):
            continue
        if f0 == 0.0:
            out.append((xs[i], xs[i]))
        elif f0 * f1 < 0:
            out.append((xs[i], xs[i + 1]))
    return out


def edge_brackets(
    f: Callable[[float], float],
    xs: np.ndarray,
    fs: np.ndarray,
    depth: int = 3,
    sub: int = 16,
    want: Callable[[float, float], bool] | None = None,
) -> list[tuple[float, float]]:
    """Sign-change cells of tabulated ``f``. Cells with one finite and one
    non-finite end are subdivided up to ``depth`` times, because a root can
    sit in a window narrower than the grid next to where ``f`` ceases to be
    defined. ``want(f_finite, x_finite)`` may veto a subdivision."""
    out = []
    for i in range(len(xs) - 1):
        f0, f1 = fs[i], fs[i + 1]
        ok0, ok1 = np.isfinite(f0), np.isfinite(f1)
        if ok0 and ok1:
            if f0 == 0.0:
                out.append((xs[i], xs[i]))
            elif f0 * f1 < 0:
                out.append((xs[i], xs[i + 1]))
        elif depth > 0 and ok0 != ok1:
            fin = f0 if ok0 else f1
            if want is not None and not want(fin, xs[i] if ok0 else xs[i + 1]):
                continue
            ys = np.linspace(xs[i], xs[i + 1], sub + 1)
            with np.errstate(all="ignore"):
                inner = [f(y) for y in ys[1:-1]]
            gs = np.array([f0, *inner, f1], dtype=float)
            out.extend(edge_brackets(f, ys, gs, depth - 1, sub, want))
    return out


def refine(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-13) -> float:
    if lo == hi:
        return lo
    return brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


def all_roots(
    f: Callable[[float], float],
    a: float,
    b: float,
    n: int = 1000,
    xtol: float = 1e-13,
    max_jump: float | None = None,
) -> list[float]:
    """All sign-change roots of ``f`` in ``[a, b]`` detectable at scan
    resolution ``n``. If ``max_jump`` is set, refined points where ``|f|``
    exceeds it are treated as poles and discarded."""
    roots = []
    for lo, hi in bracket_scan(f, a, b, n):
        r = refine(f, lo, hi, xtol)
        if max_jump is not None and not abs(f(r)) <= max_jump:
            continue
        roots.append(r)
    return roots


def newton(
    residual: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    x0: Sequence[float],
    tol: float = 1e-13,
    maxiter: int = 60,
    max_step: float | None = None,
) -> np.ndarray:
    """Newton iteration with backtracking on ``||F||``.

    ``residual(x)`` returns ``(F, J)``. Converged when ``||F||_inf < tol``
    or the step stalls below machine precision relative to ``x``.
    """
    x = np.asarray(x0, dtype=float).copy()
    F, J = residual(x)
    norm = np.max(np.abs(F))
    for _ in range(maxiter):
        if not np.isfinite(norm):
            break
        if norm < tol:
            return x
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NewtonFailure(f"singular Jacobian at {x}") from exc
        if max_step is not None:
            scale = np.max(np.abs(step)) / max_step
            if scale > 1:
                step /= scale
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * step
            with np.errstate(all="ignore"):
                Fn, Jn = residual(xn)
            nn = np.max(np.abs(Fn))
            if np.isfinite(nn) and nn < norm * (1 - 1e-4 * lam) or nn < tol:
                break
            lam *= 0.5
        else:
            # accept the last tiny step only if we are already at rounding level
            if np.max(np.abs(step)) <= 1e-14 * (1 + np.max(np.abs(x))):
                return x
            raise NewtonFailure(f"line search failed at {x}, |F|={norm:.3e}")
        x, F, J, norm = xn, Fn, Jn, nn
        if np.max(np.abs(lam * step)) <= 4e-16 * (1 + np.max(np.abs(x))) and norm < 1e3 * tol:
            return x
    if norm < tol:
        return x
    raise NewtonFailure(f"no convergence from {x0}: |F|={norm:.3e}")

"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from cwpotts import bifurcation as B
from cwpotts import lines as L
from cwpotts import potential as P
from cwpotts import regimes as R
from cwpotts.model import brute_force_conditional, counts_of, exact_conditional_prob, first_layer_expectation, g_of_t

RESULTS: list[str] = []


class Criterion:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.details = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def check(self, ok, detail):
        self.details.append((bool(ok), detail))

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        self.check(elapsed < self.budget, f"runtime {elapsed:.2f}s < {self.budget}s")
        ok = exc_type is None and all(o for o, _ in self.details)
        failed = [d for o, d in self.details if not o]
        if exc_type is not None:
            failed.append(f"{exc_type.__name__}: {exc}")
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {self.number}: {self.title} ({elapsed:.1f}s)"
        if failed:
            line += " -- " + "; ".join(failed)
        RESULTS.append(line)
        print(line)
        if exc_type is None:
            assert ok, line
        return False


def test_criterion_01_constants():
    with Criterion(1, "beta_NG and beta_BE", budget=2.0) as c:
        t0 = time.perf_counter()
        bng = L.beta_ng()
        c.check(time.perf_counter() - t0 < 1.0, "beta_NG runtime")
        t0 = time.perf_counter()
        bbe = L.beta_be()
        c.check(time.perf_counter() - t0 < 1.0, "beta_BE runtime")
        c.check(abs(bng - 2.52885) < 5e-5, f"beta_NG={bng}")
        c.check(abs(bbe - 2.59590) < 5e-5, f"beta_BE={bbe}")


def test_criterion_02_b2b_entry():
    with Criterion(2, "B2B entry point and s_*", budget=1.0) as c:
        smp = L.b2b_line(2 / 3)
        c.check(abs(smp.beta - 8 / 3) < 1e-9, f"beta={smp.beta}")
        c.check(abs(smp.g - 0.026481) < 5e-6, f"g={smp.g}")
        c.check(abs(L.b2b_s_star() - 0.66656) < 5e-5, f"s_*={L.b2b_s_star()}")


def test_criterion_03_ew_limit():
    with Criterion(3, "EW limit and four minima", budget=10.0) as c:
        lim = 4 * math.log(2)
        c.check(abs(L.ew_beta(2 * math.log(2), 2.0) - lim) < 1e-8, "closed-form substitution")
        c.check(abs(L.ew_line(2 * math.log(2) + 1e-9).beta - lim) < 1e-8, "beta -> 4 log 2")
        lo, hi = L.line_domain("EW")[1:]
        for s in np.linspace(lo, hi, 7)[1:-1]:
            smp = L.ew_line(s)
            pts = B.find_stationary_points(np.ones(3) / 3, smp.beta, smp.g)
            mins = B.global_minimizers(pts, depth_tol=1e-8)
            spread = np.ptp([p.value for p in mins])
            c.check(len(mins) == 4 and spread < 1e-8, f"s={s:.4f}: {len(mins)} minima, spread {spread:.1e}")


def test_criterion_04_eu_taylor():
    with Criterion(4, "EU third-order Taylor coefficients", budget=5.0) as c:
        t = L.eu_taylor(3.0)
        ref = [1.0, -1 / 3, 0.5, -math.log(3) - 0.5]
        err = np.max(np.abs(np.array([t.x2y, t.y3, t.z2, t.constant]) - ref))
        c.check(err < 1e-9, f"beta=3 error {err:.1e}")
        for beta in (3.2, 3.5, 4.0):
            t = L.eu_taylor(beta)
            c.check(abs(t.x2y - L.eu_reference_ratio(beta)) < 1e-6, f"beta={beta}: x2y vs A1/A2")
            c.check(abs(t.y3 + t.x2y / 3) < 1e-6, f"beta={beta}: y3 = -x2y/3")


def test_criterion_05_derivatives():
    with Criterion(5, "derivative correctness", budget=10.0) as c:
        rng = np.random.default_rng(2024)
        worst_g = worst_h = 0.0
        h = 1e-5
        for _ in range(100):
            alpha, m = rng.dirichlet(np.ones(3), 2)
            beta, g = rng.uniform(0.5, 3.0), rng.uniform(0.05, 3.0)
            grad, hess = P.hs_gradient(alpha, m, beta, g), P.hs_hessian(alpha, m, beta, g)
            fd_g, fd_h = np.empty(3), np.empty((3, 3))
            for a in range(3):
                e = np.zeros(3)
                e[a] = h
                fd_g[a] = (P.hs_value(alpha, m + e, beta, g) - P.hs_value(alpha, m - e, beta, g)) / (2 * h)
                fd_h[a] = (P.hs_gradient(alpha, m + e, beta, g) - P.hs_gradient(alpha, m - e, beta, g)) / (2 * h)
            worst_g = max(worst_g, np.max(np.abs(grad - fd_g)))
            worst_h = max(worst_h, np.max(np.abs(hess - fd_h)))
        c.check(worst_g < 1e-6, f"gradient error {worst_g:.1e}")
        c.check(worst_h < 1e-6, f"hessian error {worst_h:.1e}")
        worst = 0.0
        for _ in range(50):
            b, g = rng.uniform(1.0, 3.0), rng.uniform(0.05, 2.0)
            y = rng.uniform(-b / 6, b / 3)
            w, e = math.exp(g) + 1, math.exp
            jet = P.chart_jet(lambda q, Bb, G: P.chi_chart(q, Bb, G)[1], 0.0, y, b, g, 2)
            den = w * w - w - 2
            dy = (-(b + 6 * y - 2) * w * e(-3 * y) - (b - 3 * y - 1) * (w - 1) * e(3 * y) + w * w - w + 2) / den
            dyy = (3 * (b + 6 * y - 4) * w * e(-3 * y) - 3 * (b - 3 * y - 2) * (w - 1) * e(3 * y)) / den
            worst = max(worst, abs(jet.derivative((0, 1)) - dy), abs(jet.derivative((0, 2)) - dyy))
        c.check(worst < 1e-10, f"jet vs closed form {worst:.1e}")


def test_criterion_06_oracle():
    with Criterion(6, "finite-n oracle equivalence", budget=30.0) as c:
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(2, 9))
            eta = rng.integers(0, 3, n)
            beta, g = rng.uniform(0.0, 3.0), g_of_t(rng.uniform(0.02, 3.0))
            a = exact_conditional_prob(n, counts_of(eta[1:]), beta, g).as_array()
            b = first_layer_expectation(n, counts_of(eta[1:]), beta, g).as_array()
            worst = max(worst, np.max(np.abs(a - b)))
        c.check(worst < 1e-12, f"exact vs first layer {worst:.1e}")
        worst = 0.0
        for n in range(2, 7):
            for _ in range(5):
                eta = rng.integers(0, 3, n)
                beta, g = rng.uniform(0.0, 3.0), g_of_t(rng.uniform(0.02, 3.0))
                ref = brute_force_conditional(eta, beta, g).as_array()
                got = exact_conditional_prob(n, counts_of(eta[1:]), beta, g).as_array()
                worst = max(worst, np.max(np.abs(ref - got)))
        c.check(worst < 1e-12, f"contingency vs brute force {worst:.1e}")


def test_criterion_07_line_residuals():
    with Criterion(7, "line residual replay", budget=60.0) as c:
        for name in L.LINES:
            samples, failures = L.sample_line(name, 200)
            worst = max(s.residual_norm for s in samples)
            expected = 1 if name == "BE" else 200
            c.check(
                len(samples) == expected and not failures, f"{name}: {len(samples)} samples, {len(failures)} failures"
            )
            c.check(worst < 1e-10, f"{name}: residual {worst:.1e}")


@pytest.mark.slow
def test_criterion_08_regimes():
    with Criterion(8, "regime classification sweep", budget=600.0) as c:
        for beta in (2.4, 2.55, 2.7, 2.72, 2.75, 2.9):
            cls = R.classify(beta, resolution=200)
            c.check(cls.sequence_ok, f"beta={beta} ({cls.regime}): sequence {cls.sequence}")
            c.check(cls.transitions_ok, f"beta={beta}: transitions {cls.matched}")
            c.check(cls.doubling_ok, f"beta={beta}: doubling {cls.doubling}")


def test_criterion_09_figure_slices():
    with Criterion(9, "bifurcation slices at beta=2.755", budget=60.0) as c:
        a = B.bifurcation_slice(2.755, 0.5)
        b = B.bifurcation_slice(2.755, 0.45)
        outside = sum(int((~cv.inside).sum()) for cv in a.curves)
        ka, kb = B.inside_components(a), B.inside_components(b)
        c.check(outside > 0, f"{outside} points outside the simplex at g=0.5")
        c.check(ka != kb, f"inside components {ka} vs {kb}")


def test_criterion_10_boundary_continuity():
    with Criterion(10, "non-Gibbs boundary continuity", budget=120.0) as c:
        gaps = L.junction_gaps(L.ng_boundary_pieces(200))
        for k, v in gaps.items():
            c.check(v < 1e-4, f"{k} gap {v:.1e}")

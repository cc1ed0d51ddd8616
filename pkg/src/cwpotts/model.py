"""Finite-volume Curie-Weiss Potts model under independent spin flips.

Exact conditional probabilities are computed by summing over the joint
spin counts rather than over configurations. Every configuration weight
depends on ``sigma`` only through the count vector ``N``, so the sum
reduces to a table of contingency weights indexed by ``N`` followed by a
log-sum-exp over ``N``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

DEFAULT_N_CAP = 400


class ResourceError(RuntimeError):
    """Requested system size exceeds the configured cap."""


def g_of_t(t: float) -> float:
    if not (np.isfinite(t) and t > 0):
        raise ValueError(f"time must be positive and finite, got {t}")
    q = math.exp(-3.0 * t)
    return math.log1p(2.0 * q) - math.log1p(-q)


def t_of_g(g: float) -> float:
    if not (np.isfinite(g) and g > 0):
        raise ValueError(f"g must be positive and finite, got {g}")
    return -(math.log(math.expm1(g)) - math.log(math.exp(g) + 2.0)) / 3.0


def time_reparam(value: float, direction: str = "t-to-g") -> float:
    """Convert between time ``t`` and the dynamical field ``g_t``."""
    if direction == "t-to-g":
        return g_of_t(value)
    if direction == "g-to-t":
        return t_of_g(value)
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class ModelParams:
    """Inverse temperature and time; ``g`` is derived from ``t``."""

    beta: float
    t: float
    g: float = field(init=False)

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "g", g_of_t(self.t))

    @classmethod
    def from_g(cls, beta: float, g: float) -> ModelParams:
        return cls(beta, t_of_g(g))


def transition_kernel(g: float) -> np.ndarray:
    """``p_t(a, b) = exp(g 1{a=b}) / (e^g + 2)``."""
    if not (np.isfinite(g) and g >= 0):
        raise ValueError(f"g must be non-negative, got {g}")
    K = np.ones((3, 3)) + (math.exp(g) - 1.0) * np.eye(3)
    return K / (math.exp(g) + 2.0)


@dataclass(frozen=True)
class ConditionalLaw:
    probs: tuple[float, float, float]

    def __post_init__(self):
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError(f"probabilities do not sum to one: {self.probs}")

    def __getitem__(self, a: int) -> float:
        return self.probs[a]

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)


def _check_counts(n: int, counts, cap: int) -> np.ndarray:
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if n > cap:
        raise ResourceError(f"n={n} exceeds cap {cap}")
    counts = np.asarray(counts, dtype=int)
    if counts.shape != (3,) or np.any(counts < 0) or counts.sum() != n - 1:
        raise ValueError(f"counts {counts.tolist()} must be 3 non-negative integers summing to n-1={n - 1}")
    return counts


def count_weights(counts, g: float) -> np.ndarray:
    """``W[N1, N2] = sum over sigma with counts N of prod_i p(sigma_i, eta_i)``
    for an eta-configuration with label counts ``counts``.

    Built by multiplying the generating polynomial ``sum_a p(a, b) z_a`` once
    per site, so the cost is O(n^3). All terms are non-negative, so the
    recursion has no cancellation.
    """
    K = transition_kernel(g)
    n = int(np.sum(counts))
    W = np.zeros((n + 1, n + 1))
    W[0, 0] = 1.0
    size = 0
    for b in range(3):
        p1, p2, p3 = K[0, b], K[1, b], K[2, b]
        for _ in range(int(counts[b])):
            size += 1
            new = p3 * W[: size + 1, : size + 1]
            new[1:, :] += p1 * W[:size, : size + 1]
            new[:, 1:] += p2 * W[: size + 1, :size]
            W[: size + 1, : size + 1] = new
    return W


def _log_terms(W: np.ndarray, total: int, coupling: float):
    N1, N2 = np.meshgrid(np.arange(W.shape[0]), np.arange(W.shape[1]), indexing="ij")
    N3 = total - N1 - N2
    valid = (N3 >= 0) & (W > 0)
    with np.errstate(divide="ignore"):
        logW = np.where(valid, np.log(np.where(valid, W, 1.0)), -np.inf)
    quad = 0.5 * coupling * (N1**2 + N2**2 + N3**2)
    return logW + quad, (N1, N2, N3), valid


def exact_conditional_prob(n: int, counts, beta: float, g: float, cap: int = DEFAULT_N_CAP) -> ConditionalLaw:
    """Law of ``eta_1`` given that ``eta_2..eta_n`` have label counts
    ``counts`` under the time-evolved measure ``mu_{n,beta,t}``."""
    counts = _check_counts(n, counts, cap)
    logZ = []
    for a in range(3):
        full = counts.copy()
        full[a] += 1
        terms, _, _ = _log_terms(count_weights(full, g), n, beta / n)
        logZ.append(logsumexp(terms))
    logZ = np.array(logZ)
    p = np.exp(logZ - logsumexp(logZ))
    return ConditionalLaw(tuple(float(x) for x in p / p.sum()))


def first_layer_expectation(n: int, counts, beta: float, g: float, cap: int = DEFAULT_N_CAP) -> ConditionalLaw:
    """Same law, computed as an expectation under the quenched random-field
    Potts model of the ``n - 1`` first-layer spins.

    The finite-volume first-layer weight of ``sigma_2..sigma_n`` is
    ``exp(beta/(2n) |N'|^2) prod p(sigma_i, eta_i) * sum_a exp(beta N'_a / n)``;
    the last factor is the marginalised ``sigma_1`` site and is needed for
    exact agreement at finite ``n``.
    """
    counts = _check_counts(n, counts, cap)
    terms, (N1, N2, N3), valid = _log_terms(count_weights(counts, g), n - 1, beta / n)
    K = transition_kernel(g)
    fields = [beta * N / n for N in (N1, N2, N3)]
    log_site = logsumexp(np.stack(fields), axis=0)
    log_weight = np.where(valid, terms + log_site, -np.inf)
    weight = np.exp(log_weight - logsumexp(log_weight))
    probs = []
    for eta1 in range(3):
        # f_n^{eta1}(N') = sum_a e^{beta N'_a/n} p(a, eta1) / sum_a e^{beta N'_a/n}
        f = sum(np.exp(fields[a] - log_site) * K[a, eta1] for a in range(3))
        probs.append(float(np.sum(weight * np.where(valid, f, 0.0))))
    p = np.array(probs)
    return ConditionalLaw(tuple(float(x) for x in p / p.sum()))


def brute_force_conditional(eta, beta: float, g: float) -> ConditionalLaw:
    """Reference enumeration over all ``3**n`` spin configurations.

    ``eta`` is the full second-layer configuration (labels 0..2); the entry
    ``eta[0]`` is ignored and replaced by each candidate value.
    """
    eta = list(eta)
    n = len(eta)
    if n > 8:
        raise ResourceError("brute force limited to n <= 8")
    K = transition_kernel(g)
    out = np.zeros(3)
    for sigma in itertools.product(range(3), repeat=n):
        N = np.bincount(sigma, minlength=3)
        w = math.exp(beta / (2 * n) * float(N @ N))
        rest = math.prod(K[sigma[i], eta[i]] for i in range(1, n))
        for a in range(3):
            out[a] += w * rest * K[sigma[0], a]
    out /= out.sum()
    return ConditionalLaw(tuple(float(x) for x in out))


def counts_of(eta_rest) -> np.ndarray:
    return np.bincount(np.asarray(eta_rest, dtype=int), minlength=3)

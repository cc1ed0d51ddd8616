"""Truncated multivariate Taylor arithmetic (forward mode, any order).

A :class:`Jet` stores the Taylor coefficients of a function of ``nvars``
variables around a base point, truncated at total degree ``order``.
Coefficients may carry trailing batch dimensions, so a single jet can
represent the expansion at many base points at once.

Elementary functions are applied through their univariate Taylor series:
for ``a = a0 + h`` with ``h`` nilpotent, ``f(a) = sum_k f^(k)(a0)/k! h^k``
terminates after ``order`` terms, so every result is exact up to
rounding.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

MAX_ORDER = 4


@lru_cache(maxsize=None)
def _monomials(nvars: int, order: int) -> tuple[tuple[int, ...], ...]:
    monos = [
        e
        for deg in range(order + 1)
        for e in sorted(
            (e for e in itertools.product(range(deg + 1), repeat=nvars) if sum(e) == deg),
            reverse=True,
        )
    ]
    return tuple(monos)


@lru_cache(maxsize=None)
def _index(nvars: int, order: int) -> dict[tuple[int, ...], int]:
    return {e: i for i, e in enumerate(_monomials(nvars, order))}


@lru_cache(maxsize=None)
def _product_table(nvars: int, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    monos = _monomials(nvars, order)
    index = _index(nvars, order)
    ii, jj, kk = [], [], []
    for i, a in enumerate(monos):
        for j, b in enumerate(monos):
            c = tuple(p + q for p, q in zip(a, b))
            if sum(c) <= order:
                ii.append(i)
                jj.append(j)
                kk.append(index[c])
    return np.array(ii), np.array(jj), np.array(kk)


class Jet:
    """Truncated Taylor expansion in ``nvars`` variables up to ``order``."""

    # make ndarray <op> Jet defer to the reflected Jet operator
    __array_ufunc__ = None

    def __init__(self, coeffs, nvars: int, order: int):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order must be in [0, {MAX_ORDER}], got {order}")
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.nvars = nvars
        self.order = order

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, nvars: int, order: int) -> Jet:
        value = np.asarray(value, dtype=float)
        c = np.zeros((len(_monomials(nvars, order)),) + value.shape)
        c[0] = value
        return cls(c, nvars, order)

    @classmethod
    def variable(cls, value, which: int, nvars: int, order: int) -> Jet:
        jet = cls.constant(value, nvars, order)
        if order >= 1:
            e = [0] * nvars
            e[which] = 1
            jet.coeffs[_index(nvars, order)[tuple(e)]] = 1.0
        return jet

    # -- access -----------------------------------------------------------
    @property
    def value(self):
        return self.coeffs[0]

    def coefficient(self, exponents) -> np.ndarray:
        """Taylor coefficient of ``prod x_i**e_i``."""
        return self.coeffs[_index(self.nvars, self.order)[tuple(exponents)]]

    def derivative(self, exponents) -> np.ndarray:
        """Partial derivative with multi-index ``exponents``."""
        scale = math.prod(math.factorial(e) for e in exponents)
        return self.coefficient(exponents) * scale

    def gradient(self) -> list:
        return [self.derivative(_unit(i, self.nvars)) for i in range(self.nvars)]

    def hessian(self) -> list[list]:
        out = [[None] * self.nvars for _ in range(self.nvars)]
        for i in range(self.nvars):
            for j in range(self.nvars):
                e = [0] * self.nvars
                e[i] += 1
                e[j] += 1
                out[i][j] = self.derivative(e)
        return out

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> Jet:
        if isinstance(other, Jet):
            if (other.nvars, other.order) != (self.nvars, self.order):
                raise ValueError("cannot combine jets of different shape")
            return other
        return Jet.constant(other, self.nvars, self.order)

    def __add__(self, other):
        a, b = _align(self.coeffs, self._lift(other).coeffs)
        return Jet(a + b, self.nvars, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            a, b = _align(self.coeffs, np.asarray(other, dtype=float)[np.newaxis])
            return Jet(a * b, self.nvars, self.order)
        other = self._lift(other)
        a, b = _align(self.coeffs, other.coeffs)
        ii, jj, kk = _product_table(self.nvars, self.order)
        terms = a[ii] * b[jj]
        out = np.zeros((a.shape[0],) + terms.shape[1:])
        np.add.at(out, kk, terms)
        return Jet(out, self.nvars, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, int) and k >= 0:
            out = Jet.constant(np.ones(self.coeffs.shape[1:]), self.nvars, self.order)
            for _ in range(k):
                out = out * self
            return out
        return self.compose(lambda a0, n: _power_series(a0, float(k), n))

    # -- elementary functions ---------------------------------------------
    def compose(self, series) -> Jet:
        """Apply a univariate function given by ``series(a0, n)`` -> list of
        Taylor coefficients ``f^(k)(a0)/k!`` for ``k = 0..n``."""
        a0 = self.coeffs[0]
        coefs = series(a0, self.order)
        h = Jet(self.coeffs.copy(), self.nvars, self.order)
        h.coeffs[0] = 0.0
        out = Jet.constant(coefs[0], self.nvars, self.order)
        power = None
        for k in range(1, self.order + 1):
            power = h if power is None else power * h
            out = out + power * coefs[k]
        return out

    def exp(self) -> Jet:
        return self.compose(lambda a0, n: [np.exp(a0) / math.factorial(k) for k in range(n + 1)])

    def log(self) -> Jet:
        def series(a0, n):
            return [np.log(a0)] + [(-1) ** (k + 1) / (k * a0**k) for k in range(1, n + 1)]

        return self.compose(series)

    def reciprocal(self) -> Jet:
        return self.compose(lambda a0, n: [(-1) ** k / a0 ** (k + 1) for k in range(n + 1)])

    def sqrt(self) -> Jet:
        return self.compose(lambda a0, n: _power_series(a0, 0.5, n))

    def __repr__(self) -> str:
        return f"Jet(nvars={self.nvars}, order={self.order}, value={self.value!r})"


def _align(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # leading axis is the monomial (or singleton) axis; batch axes trail
    nd = max(a.ndim, b.ndim)
    a = a.reshape(a.shape[:1] + (1,) * (nd - a.ndim) + a.shape[1:])
    b = b.reshape(b.shape[:1] + (1,) * (nd - b.ndim) + b.shape[1:])
    return a, b


def _unit(i: int, n: int) -> tuple[int, ...]:
    e = [0] * n
    e[i] = 1
    return tuple(e)


def _power_series(a0, p: float, n: int) -> list:
    coefs = []
    binom = 1.0
    for k in range(n + 1):
        coefs.append(binom * a0 ** (p - k))
        binom *= (p - k) / (k + 1)
    return coefs


def variables(values, order: int) -> tuple[Jet, ...]:
    """Seed independent variables ``x_i = values[i] + d_i``."""
    n = len(values)
    return tuple(Jet.variable(v, i, n, order) for i, v in enumerate(values))


# Dispatching elementary functions: plain floats / ndarrays go to numpy.
def exp(a):
    return a.exp() if isinstance(a, Jet) else np.exp(a)


def log(a):
    return a.log() if isinstance(a, Jet) else np.log(a)


def sqrt(a):
    return a.sqrt() if isinstance(a, Jet) else np.sqrt(a)


def value(a):
    """Order-zero part of a jet, or the argument itself."""
    return a.value if isinstance(a, Jet) else a

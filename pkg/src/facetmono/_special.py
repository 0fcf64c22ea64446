"""Regularized incomplete beta function and small log-space helpers."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 5000


@njit(cache=True)
def _betacf(a, b, x):
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2.0 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    return np.nan


@njit(cache=True)
def betainc_xy(a, b, x, y):
    """I_x(a, b) with the complement ``y = 1 - x`` supplied separately.

    Passing ``y`` avoids the cancellation in ``1 - x`` when the caller can
    form it accurately (e.g. ``h**2 / (1 + h**2)``).
    """
    if x <= 0.0:
        return 0.0
    if y <= 0.0:
        return 1.0
    log_front = (a * math.log(x) + b * math.log(y)
                 - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, y) / b


@njit(cache=True)
def _betainc_array(a, b, x):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = betainc_xy(a, b, x[i], 1.0 - x[i])
    return out


def betainc(a: float, b: float, x):
    """Regularized incomplete beta function I_x(a, b) for a, b > 0."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a > 0 and b > 0")
    arr = np.asarray(x, dtype=float)
    out = _betainc_array(float(a), float(b), arr.ravel()).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def log_binom(n: int, k: int) -> float:
    """log C(n, k); exact integer binomial first, so large n stays finite."""
    return math.log(math.comb(n, k))


def log_sphere_area(d: int) -> float:
    """log of the surface area omega_d of the unit sphere in R^d."""
    return math.log(2.0) + 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d)

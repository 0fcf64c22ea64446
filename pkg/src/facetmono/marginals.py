"""One-dimensional marginals of the rotationally symmetric families.

For every family the first coordinate of a unit-scale point has a density of
the form ``f(x) = c * (1 + x^2)^e`` (H), ``c * (1 - x^2)^e`` (B, U) or the
standard normal (G). Its CDF reduces to a regularized incomplete beta
function. The transformed kernel used by the facet-probability integral is

    L(s) = f(Finv(s)) * psi(Finv(s)),

with ``psi(h) = sqrt(1 + h^2)`` for H, ``sqrt(1 - h^2)`` for B and U and
``psi = 1`` for G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from ._special import betainc_xy
from .distributions import DistributionSpec
from .errors import DomainError, QuantileRangeError

KIND_G, KIND_H, KIND_B = 0, 1, 2

# beyond this the heavy tail of H no longer fits in a double
_X_CAP = 1e150
_NEWTON_MAX_ITER = 100
_SQRT1_2 = math.sqrt(0.5)


@njit(cache=True)
def _lower_tail(kind, p, x):
    # P(X <= x) for x <= 0, accurate in relative terms deep in the tail
    if kind == KIND_G:
        return 0.5 * math.erfc(-x * _SQRT1_2)
    if kind == KIND_H:
        x2 = x * x
        return 0.5 * betainc_xy(p, 0.5, 1.0 / (1.0 + x2), x2 / (1.0 + x2))
    ax = abs(x)
    if ax >= 1.0:
        return 0.0
    return 0.5 * betainc_xy(p, 0.5, (1.0 - ax) * (1.0 + ax), x * x)


@njit(cache=True)
def _pdf(kind, log_c, e, x):
    if kind == KIND_G:
        return math.exp(log_c - 0.5 * x * x)
    if kind == KIND_H:
        return math.exp(log_c + e * math.log1p(x * x))
    ax = abs(x)
    if ax >= 1.0:
        return 0.0 if e > 0 else math.inf
    return math.exp(log_c + e * math.log((1.0 - ax) * (1.0 + ax)))


@njit(cache=True)
def _cdf_array(kind, p, x):
    out = np.empty_like(x)
    for i in range(x.size):
        v = x[i]
        if v <= 0.0:
            out[i] = _lower_tail(kind, p, v)
        else:
            out[i] = 1.0 - _lower_tail(kind, p, -v)
    return out


@njit(cache=True)
def _sf_array(kind, p, x):
    out = np.empty_like(x)
    for i in range(x.size):
        v = x[i]
        if v >= 0.0:
            out[i] = _lower_tail(kind, p, -v)
        else:
            out[i] = 1.0 - _lower_tail(kind, p, v)
    return out


@njit(cache=True)
def _lower_quantile(kind, p, log_c, e, t):
    """Solve P(X <= x) = t for x <= 0 (t <= 1/2); NaN signals overflow."""
    if t >= 0.5:
        return 0.0
    hi = 0.0
    if kind == KIND_G:
        lo = -40.0
        x = -math.sqrt(max(0.0, -2.0 * math.log(t * 2.5066282746310002)))
    elif kind == KIND_H:
        lo = -1.0
        while _lower_tail(kind, p, lo) > t:
            hi = lo
            lo *= 8.0
            if lo < -_X_CAP:
                return math.nan
        x = 0.5 * (lo + hi)
    else:
        lo = -1.0
        x = -0.5
    x = min(max(x, lo), hi)
    for _ in range(_NEWTON_MAX_ITER):
        r = _lower_tail(kind, p, x) - t
        if r == 0.0:
            return x
        if r > 0.0:
            hi = x
        else:
            lo = x
        fx = _pdf(kind, log_c, e, x)
        xn = x - r / fx if fx > 0.0 and math.isfinite(fx) else math.nan
        if not (lo < xn < hi):
            if kind == KIND_H and hi < -1.0:
                xn = -math.sqrt(lo * hi)
            else:
                xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 4e-16 * abs(x) + 1e-300:
            return xn
        x = xn
    return x


@njit(cache=True)
def _quantile_array(kind, p, log_c, e, s):
    out = np.empty_like(s)
    for i in range(s.size):
        v = s[i]
        if v <= 0.5:
            out[i] = _lower_quantile(kind, p, log_c, e, v)
        else:
            out[i] = -_lower_quantile(kind, p, log_c, e, 1.0 - v)
    return out


def _wrap(out, like):
    return float(out) if np.ndim(like) == 0 else out


@dataclass(frozen=True)
class MarginalModel:
    """Marginal of the first coordinate of a unit-scale member of G, H, B or U."""

    spec: DistributionSpec
    kind: int
    log_c: float
    exponent: float
    cdf_param: float

    @classmethod
    def from_spec(cls, spec: DistributionSpec) -> "MarginalModel":
        if spec.family == "S":
            raise DomainError("family S has no Euclidean marginal; use its H equivalent")
        spec = spec.with_sigma(1.0)
        d = spec.d
        half_log_pi = 0.5 * math.log(math.pi)
        if spec.family == "G":
            return cls(spec, KIND_G, -0.5 * math.log(2.0 * math.pi), 0.0, 0.0)
        if spec.family == "H":
            beta = spec.beta
            log_c = -half_log_pi + math.lgamma(beta - 0.5 * (d - 1)) - math.lgamma(beta - 0.5 * d)
            return cls(spec, KIND_H, log_c, 0.5 * (d - 1) - beta, beta - 0.5 * d)
        if spec.family == "B":
            beta = spec.beta
            log_c = -half_log_pi + math.lgamma(beta + 1 + 0.5 * d) - math.lgamma(beta + 0.5 * (d + 1))
            return cls(spec, KIND_B, log_c, 0.5 * (d - 1) + beta, beta + 0.5 * (d + 1))
        # U shares the B form with exponent (d - 3)/2, i.e. beta = -1
        log_c = -half_log_pi + math.lgamma(0.5 * d) - math.lgamma(0.5 * (d - 1))
        return cls(spec, KIND_B, log_c, 0.5 * (d - 3), 0.5 * (d - 1))

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def bounded(self) -> bool:
        return self.kind == KIND_B

    @property
    def support(self) -> tuple[float, float]:
        return (-1.0, 1.0) if self.bounded else (-math.inf, math.inf)

    @property
    def const(self) -> float:
        """Normalizing constant of the marginal density."""
        return math.exp(self.log_c)

    def _check_support(self, x):
        if self.bounded and np.any(np.abs(x) > 1.0):
            raise DomainError("x lies outside the marginal support [-1, 1]")

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        self._check_support(x)
        if self.kind == KIND_G:
            out = self.log_c - 0.5 * x * x
        elif self.kind == KIND_H:
            out = self.log_c + self.exponent * np.log1p(x * x)
        else:
            ax = np.abs(x)
            with np.errstate(divide="ignore"):
                out = self.log_c + self.exponent * np.log((1.0 - ax) * (1.0 + ax))
            if self.exponent == 0.0:
                out = np.full(x.shape, self.log_c)
        return _wrap(out, x)

    def pdf(self, x):
        return _wrap(np.exp(self.log_pdf(x)), x)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.bounded:
            x = np.clip(x, -1.0, 1.0)
        out = _cdf_array(self.kind, self.cdf_param, np.ascontiguousarray(x.ravel())).reshape(x.shape)
        return _wrap(out, x)

    def sf(self, x):
        """1 - F(x) without cancellation."""
        x = np.asarray(x, dtype=float)
        if self.bounded:
            x = np.clip(x, -1.0, 1.0)
        out = _sf_array(self.kind, self.cdf_param, np.ascontiguousarray(x.ravel())).reshape(x.shape)
        return _wrap(out, x)

    def quantile(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(~((s > 0.0) & (s < 1.0))):
            raise DomainError("quantile level must lie in the open interval (0, 1)")
        out = _quantile_array(self.kind, self.cdf_param, self.log_c, self.exponent,
                              np.ascontiguousarray(s.ravel())).reshape(s.shape)
        if np.any(np.isnan(out)):
            raise QuantileRangeError(
                f"quantile of {self.spec} beyond |x| = {_X_CAP:g}; the tail is too heavy for doubles")
        return _wrap(out, s)

    def log_psi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == KIND_G:
            return _wrap(np.zeros(x.shape), x)
        if self.kind == KIND_H:
            return _wrap(0.5 * np.log1p(x * x), x)
        ax = np.abs(x)
        with np.errstate(divide="ignore"):
            return _wrap(0.5 * np.log((1.0 - ax) * (1.0 + ax)), x)

    def psi(self, x):
        return _wrap(np.exp(self.log_psi(x)), x)

    def L(self, s):
        """Kernel f(Finv(s)) * psi(Finv(s))."""
        x = self.quantile(s)
        return _wrap(np.exp(self.log_pdf(x) + self.log_psi(x)), x)

    def Lp(self, s):
        x = np.asarray(self.quantile(s))
        d = self.d
        if self.kind == KIND_G:
            out = -x
        elif self.kind == KIND_H:
            out = (d - 2.0 * self.spec.beta) * x / np.sqrt(1.0 + x * x)
        else:
            out = -(2.0 * self.exponent + 1.0) * x / np.sqrt((1.0 - x) * (1.0 + x))
        return _wrap(out, x)

    def Lpp(self, s):
        """Closed-form second derivative.

        H: -(2/c)(beta - d/2)(1 + x^2)^(beta - 1 - d/2)
        B: -(2/c)(beta + d/2)(1 - x^2)^(-beta - 1 - d/2)
        U: the B formula at beta = -1, i.e. -((d - 2)/c)(1 - x^2)^(-d/2)
        G: -1 / phi(x)
        where x = Finv(s) and c is the marginal density constant.
        """
        x = np.asarray(self.quantile(s))
        d = self.d
        if self.kind == KIND_G:
            out = -np.exp(0.5 * x * x - self.log_c)
        elif self.kind == KIND_H:
            k = self.spec.beta - 0.5 * d
            out = -2.0 * k * np.exp((k - 1.0) * np.log1p(x * x) - self.log_c)
        else:
            # exponent + 1/2 equals beta + d/2 for B and d/2 - 1 for U
            k = self.exponent + 0.5
            out = -2.0 * k * np.exp(-(k + 1.0) * np.log((1.0 - x) * (1.0 + x)) - self.log_c)
        return _wrap(out, x)


def marginal_model(spec: DistributionSpec) -> MarginalModel:
    return MarginalModel.from_spec(spec)


def marginal_pdf(model: MarginalModel, x):
    return model.pdf(x)


def marginal_cdf(model: MarginalModel, x):
    return model.cdf(x)


def marginal_quantile(model: MarginalModel, s):
    return model.quantile(s)


def kernel_L(model: MarginalModel, s):
    return model.L(s)


def kernel_Lp(model: MarginalModel, s):
    return model.Lp(s)


def kernel_Lpp(model: MarginalModel, s):
    return model.Lpp(s)

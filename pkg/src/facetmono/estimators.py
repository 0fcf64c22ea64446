"""Expected facet numbers of random convex hulls.

Two independent routes:

* Monte Carlo: sample clouds, build hulls, average facet counts.
* Quadrature of the one-dimensional representation

      P(conv(X_1..X_d) is a facet) = c * int_0^1 (1 - s)^(n-d) L(s)^(d-1) ds,

  with E f_{d-1}(P_n) = C(n, d) * P. The constant c is calibrated from the
  exact value P = 1 at n = d + 1.

The quadrature runs in the variable theta with h = tan(theta) (G, H) or
h = sin(theta) (B, U) and s = F(h); this is the same integral, but the
integrand stays bounded and smooth up to the endpoints.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._special import log_binom, log_beta
from .distributions import BLOCK_SIZE, DistributionSpec, draw
from .errors import ConcavityError, DegenerateSampleError, DomainError, QuadratureError
from .hull import DEFAULT_TOL, block_prefix_counts
from .marginals import KIND_G, KIND_H, MarginalModel
from .quadrature import integrate
from .sphere import EQUATOR_GUARD, euclidean_equivalent, gnomonic_inv

log = logging.getLogger(__name__)

MAX_RESAMPLES = 10
DEFAULT_ABS_TOL = 1e-9
RESOLVE_SIGMAS = 4.0
# below this the Gauss-Kronrod rounding floor takes over
_REL_FLOOR = 5e-14


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float
    method: str
    effort: int
    spec: DistributionSpec
    n: int
    resamples: int = 0

    def row(self) -> dict:
        return {"n": self.n, "value": self.value, "error": self.error, "effort": self.effort}


@dataclass(frozen=True)
class ScanReport:
    spec: DistributionSpec
    n_values: list[int]
    estimates: list[Estimate]
    gaps: list[float]
    gap_errors: list[float]
    resolved: list[bool]
    monotone: bool
    method: str
    seed: int | None = None
    degenerate_resamples: int = 0
    direct_gaps: list[float] | None = field(default=None)
    direct_errors: list[float] | None = field(default=None)

    def to_dict(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "method": self.method,
            "seed": self.seed,
            "rows": [e.row() for e in self.estimates],
            "gaps": list(self.gaps),
            "monotone": self.monotone,
            "degenerate_resamples": self.degenerate_resamples,
        }
        if self.direct_gaps is not None:
            out["direct_gaps"] = list(self.direct_gaps)
        return out


# --------------------------------------------------------------------------
# Monte Carlo


def _check_n(spec: DistributionSpec, n: int) -> None:
    if int(n) != n or n < spec.d + 1:
        raise DomainError(f"n must be an integer >= d + 1 = {spec.d + 1}")


def _hull_input(spec, clouds):
    # spherical clouds are counted through their gnomonic images
    if spec.family != "S":
        return clouds, np.zeros(clouds.shape[0], dtype=bool)
    near_equator = np.any(clouds[..., -1] < EQUATOR_GUARD, axis=1)
    safe = np.where(near_equator[:, None, None], 1.0, clouds)
    return np.ascontiguousarray(gnomonic_inv(safe)), near_equator


def _count(spec, clouds, tol):
    pts, bad_input = _hull_input(spec, clouds)
    counts, bad = block_prefix_counts(pts, tol)
    return counts, bad | bad_input


def _run_block(spec, n, seed, block, tol):
    counts, bad = _count(spec, draw(spec, n, BLOCK_SIZE, seed, (block,)), tol)
    resampled = np.zeros(BLOCK_SIZE, dtype=np.int64)
    for r in np.flatnonzero(bad):
        for attempt in range(1, MAX_RESAMPLES + 1):
            cloud = draw(spec, n, 1, seed, (block, int(r), attempt))
            c, b = _count(spec, cloud, tol)
            resampled[r] += 1
            if not b[0]:
                counts[r] = c[0]
                break
        else:
            raise DegenerateSampleError(
                f"replicate {block * BLOCK_SIZE + r} of {spec} stayed degenerate "
                f"after {MAX_RESAMPLES} resamples")
    return counts, resampled


def mc_prefix_counts(spec: DistributionSpec, n: int, replicates: int, seed: int,
                     workers: int = 1, tolerance: float = DEFAULT_TOL):
    """Facet counts of nested hulls, shape ``(replicates, n)``.

    Column ``k - 1`` holds the facet number of the hull of the first ``k``
    points of each replicate. Replicates are generated in fixed blocks, each
    from a stream keyed by ``(seed, block)``, so the result does not depend
    on ``workers``. Also returns the number of degenerate resamples.
    """
    _check_n(spec, n)
    if replicates < 1:
        raise DomainError("replicates must be positive")
    nblocks = -(-replicates // BLOCK_SIZE)

    def job(b):
        return _run_block(spec, n, seed, b, tolerance)

    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(nblocks)))
    else:
        parts = [job(b) for b in range(nblocks)]
    counts = np.concatenate([p[0] for p in parts])[:replicates]
    resamples = int(np.concatenate([p[1] for p in parts])[:replicates].sum())
    if resamples:
        log.info("%s: %d degenerate replicate(s) resampled", spec, resamples)
    return counts, resamples


def _mc_estimate(spec, n, column, resamples):
    reps = column.size
    mean = float(np.mean(column))
    se = float(np.std(column, ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf
    return Estimate(mean, se, "mc", reps, spec, n, resamples)


def expect_mc(spec: DistributionSpec, n: int, replicates: int, seed: int,
              workers: int = 1, tolerance: float = DEFAULT_TOL) -> Estimate:
    """Monte Carlo mean facet number with its standard error."""
    if replicates < 2:
        raise DomainError("replicates must be at least 2")
    counts, resamples = mc_prefix_counts(spec, n, replicates, seed, workers, tolerance)
    return _mc_estimate(spec, n, counts[:, n - 1], resamples)


# --------------------------------------------------------------------------
# quadrature


def _euclidean(spec: DistributionSpec) -> DistributionSpec:
    return euclidean_equivalent(spec) if spec.family == "S" else spec


def _theta_terms(model: MarginalModel, theta):
    """h(theta), log(1 +- h^2) and log dh/dtheta without endpoint cancellation."""
    log_cos = np.log(np.cos(theta))
    if model.kind == KIND_G or model.kind == KIND_H:
        return np.tan(theta), -2.0 * log_cos, -2.0 * log_cos
    return np.sin(theta), 2.0 * log_cos, log_cos


def _log_base(model: MarginalModel, theta):
    """h and log of f(h)^d psi(h)^(d-1) dh/dtheta."""
    d = model.d
    h, log_q, log_jac = _theta_terms(model, theta)
    if model.kind == KIND_G:
        log_f = model.log_c - 0.5 * h * h
        log_psi = 0.0
    else:
        log_f = model.log_c + model.exponent * log_q
        log_psi = 0.5 * log_q
    return h, d * log_f + (d - 1) * log_psi + log_jac


def _survival_integrand(model: MarginalModel, k: int):
    def f(theta):
        h, base = _log_base(model, theta)
        with np.errstate(divide="ignore"):
            log_sf = np.log(model.sf(h))
        return np.exp(k * log_sf + base)
    return f


def _difference_integrand(model: MarginalModel, n: int):
    # (d - n F)(1 - F)^(n-d-1) f^d psi^(d-1); the binomial prefactor is applied outside
    d = model.d

    def f(theta):
        h, base = _log_base(model, theta)
        with np.errstate(divide="ignore"):
            log_sf = np.log(model.sf(h))
        return (d - n * model.cdf(h)) * np.exp((n - d - 1) * log_sf + base)
    return f


def survival_integral(model: MarginalModel, k: int, abs_tol: float = 0.0,
                      rel_tol: float = _REL_FLOOR):
    """int_0^1 (1 - s)^k L(s)^(d-1) ds."""
    return integrate(_survival_integrand(model, k), -0.5 * math.pi, 0.5 * math.pi,
                     abs_tol=abs_tol, rel_tol=rel_tol)


@lru_cache(maxsize=256)
def _calibration(spec: DistributionSpec):
    model = MarginalModel.from_spec(spec)
    return model, survival_integral(model, 1)


def _quad_log_value(spec, n, abs_tol, log_scale):
    """Shared path: returns (value, error, evaluations) of exp(log_scale) * I(n-d) / I(1)."""
    espec = _euclidean(spec)
    _check_n(espec, n)
    model, ref = _calibration(espec)
    d = espec.d
    if n == d + 1:
        return math.exp(log_scale), 0.0, ref.evaluations
    scale = math.exp(log_scale - math.log(ref.value))
    res = survival_integral(model, n - d, abs_tol=0.5 * abs_tol / scale)
    value = scale * res.value
    error = scale * res.error + value * ref.error / ref.value
    if not error <= abs_tol:
        raise QuadratureError(
            f"{spec}, n={n}: error {error:.3g} exceeds tolerance {abs_tol:.3g}",
            value=value, error=error)
    return value, error, res.evaluations + ref.evaluations


def facet_probability_quad(spec: DistributionSpec, n: int,
                           abs_tol: float = DEFAULT_ABS_TOL) -> Estimate:
    """Probability that d fixed points of an n-point sample span a facet."""
    value, error, evals = _quad_log_value(spec, n, abs_tol, 0.0)
    return Estimate(value, error, "quad", evals, spec, n)


def expect_quad(spec: DistributionSpec, n: int, abs_tol: float = DEFAULT_ABS_TOL) -> Estimate:
    """C(n, d) times the calibrated facet probability."""
    d = _euclidean(spec).d
    _check_n(_euclidean(spec), n)
    value, error, evals = _quad_log_value(spec, n, abs_tol, log_binom(n, d))
    return Estimate(value, error, "quad", evals, spec, n)


def direct_gap_quad(spec: DistributionSpec, n: int, abs_tol: float = DEFAULT_ABS_TOL):
    """E f(P_n) - E f(P_{n-1}) from the single difference integral.

    The integrand [C(n,d)(1-s) - C(n-1,d)] (1-s)^(n-d-1) L(s)^(d-1) is
    rewritten as C(n-1,d)/(n-d) * (d - n s) (1-s)^(n-d-1) L(s)^(d-1)
    to avoid cancellation between the binomials.
    """
    espec = _euclidean(spec)
    d = espec.d
    if n < d + 2:
        raise DomainError(f"the difference needs n >= d + 2 = {d + 2}")
    model, ref = _calibration(espec)
    scale = math.exp(log_binom(n - 1, d) - math.log(n - d) - math.log(ref.value))
    res = integrate(_difference_integrand(model, n), -0.5 * math.pi, 0.5 * math.pi,
                    abs_tol=0.5 * abs_tol / scale, rel_tol=_REL_FLOOR)
    value = scale * res.value
    error = scale * res.error + abs(value) * ref.error / ref.value
    return value, error


def beta_identity_residual(n: int, d: int) -> float:
    """C(n,d) [B(d, n-d+1) - (n-d)/n B(d, n-d)], zero up to rounding."""
    return math.comb(n, d) * (math.exp(log_beta(d, n - d + 1))
                              - (n - d) / n * math.exp(log_beta(d, n - d)))


# --------------------------------------------------------------------------
# monotonicity


def monotonicity_scan(spec: DistributionSpec, n_min: int, n_max: int, method: str = "quad",
                      effort: int | None = None, seed: int = 0, workers: int = 1,
                      abs_tol: float = DEFAULT_ABS_TOL) -> ScanReport:
    """Estimates for n_min..n_max with consecutive gaps and a monotonicity verdict.

    quad: monotone iff every gap exceeds its combined error and every
    directly integrated difference is positive beyond its error.
    mc: ``effort`` replicates of n_max-point clouds; row n uses the first n
    points. A gap is resolved when it exceeds 4 combined standard errors;
    monotone iff no resolved gap is negative.
    """
    d = _euclidean(spec).d
    if not (d + 1 <= n_min < n_max):
        raise DomainError(f"need d + 1 = {d + 1} <= n_min < n_max")
    n_values = list(range(n_min, n_max + 1))
    if method == "quad":
        def one(n):
            est = expect_quad(spec, n, abs_tol)
            direct = direct_gap_quad(spec, n, abs_tol) if n > n_min else None
            return est, direct

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one, n_values))
        else:
            results = [one(n) for n in n_values]
        estimates = [r[0] for r in results]
        direct = [r[1] for r in results[1:]]
        gaps = [b.value - a.value for a, b in zip(estimates, estimates[1:])]
        gap_err = [a.error + b.error for a, b in zip(estimates, estimates[1:])]
        resolved = [abs(g) > e for g, e in zip(gaps, gap_err)]
        monotone = (all(g > e for g, e in zip(gaps, gap_err))
                    and all(v > e for v, e in direct))
        return ScanReport(spec, n_values, estimates, gaps, gap_err, resolved, monotone, "quad",
                          None, 0, [v for v, _ in direct], [e for _, e in direct])
    if method == "mc":
        if effort is None or effort < 2:
            raise DomainError("mc scans need effort >= 2 replicates")
        counts, resamples = mc_prefix_counts(spec, n_max, effort, seed, workers)
        estimates = [_mc_estimate(spec, n, counts[:, n - 1], resamples) for n in n_values]
        gaps = [b.value - a.value for a, b in zip(estimates, estimates[1:])]
        gap_err = [math.hypot(a.error, b.error) for a, b in zip(estimates, estimates[1:])]
        resolved = [abs(g) > RESOLVE_SIGMAS * e for g, e in zip(gaps, gap_err)]
        monotone = not any(r and g < 0 for g, r in zip(gaps, resolved))
        return ScanReport(spec, n_values, estimates, gaps, gap_err, resolved, monotone, "mc",
                          int(seed), resamples)
    raise DomainError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# concave comparison


@dataclass(frozen=True)
class BetaWeight:
    """Weight s^a (1 - s)^b on [0, 1]; a = b = 0 is the constant weight."""

    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.a <= -1 or self.b <= -1:
            raise DomainError("weight exponents must exceed -1 for integrability")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return s ** self.a * (1.0 - s) ** self.b


@dataclass(frozen=True)
class Line:
    """g(s) = slope * (s - root) with negative slope."""

    slope: float
    root: float

    def __post_init__(self):
        if not self.slope < 0:
            raise DomainError("the linear factor needs a negative slope")
        if not 0.0 < self.root < 1.0:
            raise DomainError("the root must lie in (0, 1)")

    def __call__(self, s):
        return self.slope * (np.asarray(s, dtype=float) - self.root)


@dataclass(frozen=True)
class LinearKernel:
    """L(s) = slope * s; the equality case of the comparison."""

    slope: float
    d: int

    def L(self, s):
        return self.slope * np.asarray(s, dtype=float)

    def Lpp(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))


def concave_comparison_gap(weight, line: Line, kernel, d: int | None = None,
                           abs_tol: float = 1e-12) -> float:
    """int h g L^(d-1) - int h g l^(d-1) over [0, 1], l(s) = L(s*) s / s*.

    Positive whenever L is positive and strictly concave; zero when L is
    linear through the origin. Kernels with positive curvature anywhere on
    a 199-point probe grid are rejected.
    """
    d = kernel.d if d is None else d
    probe = np.linspace(0.005, 0.995, 199)
    if np.any(np.asarray(kernel.Lpp(probe)) > 0):
        raise ConcavityError("kernel is not concave on (0, 1)")
    root = line.root
    chord = float(kernel.L(root)) / root

    def integrand(s):
        L = np.asarray(kernel.L(s))
        return weight(s) * line(s) * (L ** (d - 1) - (chord * s) ** (d - 1))

    return integrate(integrand, 0.0, 1.0, abs_tol=abs_tol, rel_tol=1e-12).value

"""Gnomonic projection between R^d and the open upper half-sphere.

The central projection g(x) = (x, 1) / sqrt(1 + |x|^2) maps segments to
great-circle arcs, so spherical hulls on the half-sphere correspond facet by
facet to Euclidean hulls of the projected points. It pushes the H density
with parameter beta forward to the S density with alpha = 2 beta - d - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec
from .errors import DomainError
from .hull import DEFAULT_TOL, HullSummary, hull_facets

# g^{-1} blows up at the equator
EQUATOR_GUARD = 1e-12


def gnomonic(x):
    """Map points of R^d (last axis) onto the upper half of S^d in R^(d+1)."""
    x = np.asarray(x, dtype=float)
    scale = 1.0 / np.sqrt(1.0 + np.sum(x * x, axis=-1, keepdims=True))
    return np.concatenate([x * scale, scale], axis=-1)


def gnomonic_inv(y):
    y = np.asarray(y, dtype=float)
    last = y[..., -1:]
    if np.any(last < EQUATOR_GUARD):
        raise DomainError("point lies on or below the equator of the half-sphere")
    return y[..., :-1] / last


def gnomonic_jacobian(x):
    """sqrt(det(Dg^T Dg)) = (1 + |x|^2)^(-(d+1)/2)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    out = np.exp(-0.5 * (d + 1) * np.log1p(np.sum(x * x, axis=-1)))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GnomonicMap:
    d: int

    def forward(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise DomainError(f"expected {self.d}-vectors")
        return gnomonic(x)

    def inverse(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.d + 1:
            raise DomainError(f"expected {self.d + 1}-vectors")
        return gnomonic_inv(y)

    def jacobian(self, x):
        return gnomonic_jacobian(x)


def euclidean_equivalent(spec: DistributionSpec) -> DistributionSpec:
    """The H member whose gnomonic image is the given S member."""
    if spec.family != "S":
        raise DomainError("expected a family S specification")
    return DistributionSpec("H", spec.d, beta=0.5 * (spec.alpha + spec.d + 1))


def spherical_equivalent(spec: DistributionSpec) -> DistributionSpec:
    """The S member obtained by pushing an H member through g."""
    if spec.family != "H":
        raise DomainError("expected a family H specification")
    return DistributionSpec("S", spec.d, alpha=2.0 * spec.beta - spec.d - 1)


def spherical_hull_facets(points, tolerance: float = DEFAULT_TOL) -> HullSummary:
    """Facets of the spherical hull of points on the open upper half-sphere.

    Rows of ``points`` are unit (d+1)-vectors; facets are reported as index
    sets, identical to those of the Euclidean hull of the projected cloud.
    """
    y = np.asarray(points, dtype=float)
    if y.ndim != 2:
        raise DomainError("points must have shape (n, d + 1)")
    if np.any(np.abs(np.linalg.norm(y, axis=1) - 1.0) > 1e-9):
        raise DomainError("points must lie on the unit sphere")
    return hull_facets(gnomonic_inv(y), tolerance)

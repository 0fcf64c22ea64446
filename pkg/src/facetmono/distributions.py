"""Rotationally symmetric point distributions: densities, sampling and CSV I/O.

Families
--------
G  centred Gaussian, density proportional to exp(-|x|^2 / (2 sigma^2))
H  heavy-tailed, density proportional to (1 + |x|^2 / sigma^2)^(-beta), beta > d/2
B  beta-type on the ball of radius sigma, (1 - |x|^2 / sigma^2)^beta, beta > -1
U  uniform on the sphere of radius sigma in R^d
S  density c * y_{d+1}^alpha on the open upper half of the unit sphere in R^(d+1)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._special import log_sphere_area
from .errors import DomainError

FAMILIES = ("G", "H", "B", "U", "S")

# replicates drawn together from one derived stream
BLOCK_SIZE = 1024

SPHERE_RTOL = 1e-9

_R_MAX = 1.0 - 2.0**-53


@dataclass(frozen=True)
class DistributionSpec:
    """One member of a distribution family.

    ``beta`` is used by H and B, ``alpha`` by S, ``sigma`` by every family
    except S.
    """

    family: str
    d: int
    beta: float | None = None
    alpha: float | None = None
    sigma: float = 1.0

    def __post_init__(self):
        fam = str(self.family).upper()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 2:
            raise DomainError("d must be an integer >= 2")
        object.__setattr__(self, "d", int(self.d))
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError("sigma must be positive and finite")
        if fam == "H":
            if self.beta is None or not self.beta > self.d / 2:
                raise DomainError("beta must exceed d/2 for family H")
        elif fam == "B":
            if self.beta is None or not self.beta > -1:
                raise DomainError("beta must exceed -1 for family B")
        elif fam == "S":
            if self.alpha is None or not self.alpha > -1:
                raise DomainError("alpha must exceed -1 for family S")
            if self.sigma != 1.0:
                raise DomainError("family S has no scale parameter")
        for name in ("beta", "alpha"):
            value = getattr(self, name)
            if value is not None:
                if not math.isfinite(value):
                    raise DomainError(f"{name} must be finite")
                object.__setattr__(self, name, float(value))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def dim(self) -> int:
        """Length of a sampled coordinate vector."""
        return self.d + 1 if self.family == "S" else self.d

    def with_sigma(self, sigma: float) -> "DistributionSpec":
        return DistributionSpec(self.family, self.d, self.beta, self.alpha, sigma)

    def to_dict(self) -> dict:
        out: dict = {"class": self.family, "d": self.d}
        if self.family in ("H", "B"):
            out["beta"] = self.beta
        if self.family == "S":
            out["alpha"] = self.alpha
        else:
            out["sigma"] = self.sigma
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DistributionSpec":
        return cls(data["class"], data["d"], data.get("beta"), data.get("alpha"),
                   data.get("sigma", 1.0))

    def __str__(self):
        parts = [f"{self.family}(d={self.d}"]
        if self.beta is not None and self.family in ("H", "B"):
            parts.append(f"beta={self.beta:g}")
        if self.family == "S":
            parts.append(f"alpha={self.alpha:g}")
        elif self.sigma != 1.0:
            parts.append(f"sigma={self.sigma:g}")
        return ", ".join(parts) + ")"


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    spec: DistributionSpec
    seed: int = field(default=0)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DomainError("a point cloud needs at least one point")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.spec.d


def log_normalizer(spec: DistributionSpec) -> float:
    d, s = spec.d, spec.sigma
    half_log_pi = 0.5 * d * math.log(math.pi)
    if spec.family == "G":
        return -0.5 * d * math.log(2.0 * math.pi * s * s)
    if spec.family == "H":
        return -half_log_pi + math.lgamma(spec.beta) - math.lgamma(spec.beta - 0.5 * d) - d * math.log(s)
    if spec.family == "B":
        return (-half_log_pi + math.lgamma(0.5 * d + spec.beta + 1.0) - math.lgamma(spec.beta + 1.0)
                - d * math.log(s))
    if spec.family == "U":
        return -log_sphere_area(d) - (d - 1) * math.log(s)
    # S: the push-forward of H with beta = (alpha + d + 1) / 2 keeps H's constant
    beta = 0.5 * (spec.alpha + d + 1)
    return -half_log_pi + math.lgamma(beta) - math.lgamma(beta - 0.5 * d)


def log_density(spec: DistributionSpec, x):
    """Log of the normalized density at ``x`` (shape ``(..., dim)``)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.dim:
        raise DomainError(f"expected vectors of length {spec.dim}, got {x.shape[-1]}")
    logc = log_normalizer(spec)
    fam = spec.family
    r2 = np.sum(x * x, axis=-1) / (spec.sigma * spec.sigma)
    if fam == "G":
        out = logc - 0.5 * r2
    elif fam == "H":
        out = logc - spec.beta * np.log1p(r2)
    elif fam == "B":
        if np.any(r2 > 1.0):
            raise DomainError("point lies outside the ball of radius sigma")
        if spec.beta == 0.0:
            out = np.full(r2.shape, logc)
        else:
            with np.errstate(divide="ignore"):
                out = logc + spec.beta * np.log1p(-r2)
    elif fam == "U":
        if np.any(np.abs(np.sqrt(r2) - 1.0) > SPHERE_RTOL):
            raise DomainError("point is not on the sphere of radius sigma")
        out = np.full(r2.shape, logc)
    else:
        last = x[..., -1]
        if np.any(np.abs(np.sqrt(r2) - 1.0) > SPHERE_RTOL) or np.any(last <= 0.0):
            raise DomainError("point is not on the open upper half-sphere")
        out = logc + spec.alpha * np.log(last)
    return float(out) if np.ndim(out) == 0 else out


def density(spec: DistributionSpec, x):
    """Normalized density; for U and S with respect to spherical Lebesgue measure."""
    return np.exp(log_density(spec, x))


def _streams(seed: int, key: tuple[int, ...]):
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    direction, radial = ss.spawn(2)
    return (np.random.Generator(np.random.Philox(direction)),
            np.random.Generator(np.random.Philox(radial)))


def draw(spec: DistributionSpec, n: int, reps: int, seed: int, key: tuple[int, ...]) -> np.ndarray:
    """Draw ``reps`` independent clouds of ``n`` points, shape ``(reps, n, dim)``.

    Point-major generation: the first ``m`` points of every cloud do not
    depend on ``n``, so one draw serves all smaller sample sizes.
    """
    if n < 1 or reps < 1:
        raise DomainError("n and reps must be positive")
    g_dir, g_rad = _streams(seed, key)
    fam, d = spec.family, spec.d
    if fam == "S":
        inner = DistributionSpec("H", d, beta=0.5 * (spec.alpha + d + 1))
        from .sphere import gnomonic
        return gnomonic(draw(inner, n, reps, seed, key))

    z = g_dir.standard_normal((n, reps, d))
    if fam == "G":
        unit = z
    elif fam == "H":
        w = 2.0 * g_rad.standard_gamma(spec.beta - 0.5 * d, size=(n, reps))
        unit = z / np.sqrt(w)[..., None]
    elif fam == "B":
        t = g_rad.beta(0.5 * d, spec.beta + 1.0, size=(n, reps))
        r = np.minimum(np.sqrt(t), _R_MAX)
        unit = z * (r / np.linalg.norm(z, axis=-1))[..., None]
    else:
        unit = z / np.linalg.norm(z, axis=-1)[..., None]
    return np.ascontiguousarray((spec.sigma * unit).transpose(1, 0, 2))


def sample(spec: DistributionSpec, n: int, seed: int) -> PointCloud:
    """``n`` independent points from ``spec``; a pure function of its arguments."""
    return PointCloud(draw(spec, n, 1, seed, (0,))[0], spec, int(seed))


def cloud_header(dim: int, spherical: bool) -> list[str]:
    prefix = "y" if spherical else "x"
    return [f"{prefix}{i + 1}" for i in range(dim)]


def write_cloud_csv(cloud: PointCloud, path) -> None:
    """Write ``cloud`` to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_rows(cloud, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(cloud, fh)


def _write_rows(cloud, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(cloud_header(cloud.points.shape[1], cloud.spec.family == "S"))
    for row in cloud.points:
        writer.writerow([repr(float(v)) for v in row])


def read_cloud_csv(path) -> np.ndarray:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if not header or header[0][0] not in "xy":
        raise DomainError("point cloud CSV must start with an x1,... or y1,... header")
    return np.array([[float(v) for v in row] for row in body], dtype=float).reshape(len(body), len(header))

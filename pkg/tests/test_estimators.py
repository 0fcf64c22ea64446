import json
import math

import numpy as np
import pytest
from scipy import integrate, special, stats

import facetmono.estimators as est
from facetmono import (
    BetaWeight,
    ConcavityError,
    DegenerateSampleError,
    DistributionSpec,
    DomainError,
    Line,
    LinearKernel,
    QuadratureError,
    concave_comparison_gap,
    direct_gap_quad,
    expect_mc,
    expect_quad,
    facet_probability_quad,
    marginal_model,
    mc_prefix_counts,
    monotonicity_scan,
)

from conftest import all_classes


def scipy_marginal(spec):
    d = spec.d
    if spec.family == "G":
        return stats.norm(), lambda x: 1.0
    if spec.family == "H":
        nu = 2 * spec.beta - d
        return stats.t(nu, scale=1 / math.sqrt(nu)), lambda x: math.sqrt(1 + x * x)
    e = (d - 1) / 2 + (spec.beta if spec.family == "B" else -1.0)
    return stats.beta(e + 1, e + 1, loc=-1, scale=2), lambda x: math.sqrt(max(0.0, 1 - x * x))


def scipy_expectation(spec, n):
    """Calibrated one-dimensional representation integrated in s with scipy."""
    dist, psi = scipy_marginal(spec)
    d = spec.d

    def L(s):
        x = dist.ppf(s)
        return dist.pdf(x) * psi(x)

    def moment(k):
        return integrate.quad(lambda s: (1 - s) ** k * L(s) ** (d - 1), 0, 1,
                              epsabs=0, epsrel=1e-12, limit=400)[0]

    return special.comb(n, d, exact=True) * moment(n - d) / moment(1)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_simplex_identity(d):
    for spec in all_classes(d):
        mc = expect_mc(spec, d + 1, 1000, seed=1)
        assert mc.value == d + 1 and mc.error == 0.0
        q = expect_quad(spec, d + 1)
        assert q.value == pytest.approx(d + 1, abs=1e-10)


def test_circle_identity():
    spec = DistributionSpec("U", 2)
    counts, _ = mc_prefix_counts(spec, 25, 300, seed=4)
    np.testing.assert_array_equal(counts[:, 4:], np.broadcast_to(np.arange(5, 26), (300, 21)))
    for n in (5, 10, 25, 100):
        assert expect_quad(spec, n).value == pytest.approx(n, abs=1e-8)


def test_sphere_vertices_identity():
    # all points of a sphere sample are vertices of a simplicial polytope: f = 2n - 4
    spec = DistributionSpec("U", 3)
    for n in (4, 10, 40):
        assert expect_quad(spec, n).value == pytest.approx(2 * n - 4, abs=1e-8)
    assert expect_mc(spec, 12, 200, seed=3).value == 20


@pytest.mark.parametrize("spec, n", [
    (DistributionSpec("G", 2), 7),
    (DistributionSpec("G", 3), 12),
    (DistributionSpec("H", 2, beta=2.0), 9),
    (DistributionSpec("H", 4, beta=3.5), 15),
    (DistributionSpec("B", 2, beta=0.0), 30),
    (DistributionSpec("B", 3, beta=-0.5), 11),
    (DistributionSpec("U", 4), 9),
], ids=str)
def test_quad_against_scipy_oracle(spec, n):
    assert expect_quad(spec, n).value == pytest.approx(scipy_expectation(spec, n), rel=1e-8)


def test_planar_gaussian_against_direct_edge_formula():
    # P(segment X1X2 is an edge) = E over the line of [Phi(h)^(n-2) + (1 - Phi(h))^(n-2)],
    # where the signed distance h of the line through two Gaussian points has density
    # proportional to phi(h)^2 (Blaschke-Petkantschin in the plane)
    n = 8
    w = lambda h: stats.norm.pdf(h) ** 2
    z = integrate.quad(w, -np.inf, np.inf)[0]
    p = integrate.quad(lambda h: w(h) * (stats.norm.cdf(h) ** (n - 2) + stats.norm.sf(h) ** (n - 2)),
                       -np.inf, np.inf, epsabs=1e-14)[0] / z
    assert expect_quad(DistributionSpec("G", 2), n).value == pytest.approx(math.comb(n, 2) * p, rel=1e-9)


def test_mc_anchor_against_quad():
    spec = DistributionSpec("H", 2, beta=2.0)
    mc = expect_mc(spec, 6, 1_000_000, seed=2024)
    q = expect_quad(spec, 6)
    assert abs(mc.value - q.value) <= 4 * mc.error


def test_scale_invariance():
    a = expect_mc(DistributionSpec("B", 3, beta=1.0, sigma=7.0), 10, 2000, seed=5)
    b = expect_mc(DistributionSpec("B", 3, beta=1.0), 10, 2000, seed=5)
    assert a.value == b.value
    assert expect_quad(DistributionSpec("G", 2, sigma=0.1), 9).value == expect_quad(DistributionSpec("G", 2), 9).value


def test_facet_probability():
    spec = DistributionSpec("H", 3, beta=3.0)
    p = facet_probability_quad(spec, 10)
    assert p.value == pytest.approx(expect_quad(spec, 10).value / math.comb(10, 3), rel=1e-12)
    assert facet_probability_quad(spec, 4).value == 1.0


def test_direct_gap_matches_difference():
    for spec in (DistributionSpec("H", 2, beta=2.0), DistributionSpec("B", 3, beta=1.0), DistributionSpec("G", 4)):
        d = spec.d
        for n in (d + 2, d + 9, 60):
            gap, err = direct_gap_quad(spec, n)
            diff = expect_quad(spec, n).value - expect_quad(spec, n - 1).value
            assert gap == pytest.approx(diff, abs=1e-8)
            assert gap > 0 and err < 1e-9


def test_circle_gap_is_one():
    gap, _ = direct_gap_quad(DistributionSpec("U", 2), 17)
    assert gap == pytest.approx(1.0, abs=1e-9)


def test_binomial_beta_identity():
    for d in (2, 3, 5):
        for n in (d + 1, d + 4, 80):
            assert abs(est.beta_identity_residual(n, d)) < 1e-12


def test_errors():
    spec = DistributionSpec("G", 3)
    with pytest.raises(DomainError):
        expect_quad(spec, 3)
    with pytest.raises(DomainError):
        expect_mc(spec, 5, 1, seed=0)
    with pytest.raises(QuadratureError):
        expect_quad(spec, 150, abs_tol=1e-18)
    with pytest.raises(DomainError):
        monotonicity_scan(spec, 6, 5)


def test_degenerate_replicates_are_resampled(monkeypatch):
    spec = DistributionSpec("G", 2)
    real = est.block_prefix_counts
    calls = {"n": 0}

    def flaky(clouds, tol):
        counts, bad = real(clouds, tol)
        calls["n"] += 1
        if calls["n"] == 1:
            bad = bad.copy()
            bad[:3] = True
        return counts, bad

    monkeypatch.setattr(est, "block_prefix_counts", flaky)
    counts, resamples = mc_prefix_counts(spec, 6, 50, seed=0)
    assert resamples == 3
    assert np.all(counts[:, 2] == 3)


def test_persistent_degeneracy_raises(monkeypatch):
    def always_bad(clouds, tol):
        return np.zeros(clouds.shape[:2], dtype=np.int64), np.ones(clouds.shape[0], dtype=bool)

    monkeypatch.setattr(est, "block_prefix_counts", always_bad)
    with pytest.raises(DegenerateSampleError):
        mc_prefix_counts(DistributionSpec("G", 2), 5, 10, seed=0)


def test_mc_is_independent_of_workers():
    spec = DistributionSpec("B", 2, beta=0.0)
    a, _ = mc_prefix_counts(spec, 20, 3000, seed=7, workers=1)
    b, _ = mc_prefix_counts(spec, 20, 3000, seed=7, workers=4)
    np.testing.assert_array_equal(a, b)
    # replicate prefixes do not depend on the requested total
    c, _ = mc_prefix_counts(spec, 20, 1500, seed=7)
    np.testing.assert_array_equal(a[:1500], c)


def test_quad_scan_is_monotone():
    report = monotonicity_scan(DistributionSpec("H", 3, beta=3.0), 4, 60, "quad")
    assert report.monotone
    assert all(g > 0 for g in report.gaps)
    assert all(g > 0 for g in report.direct_gaps)
    data = report.to_dict()
    assert set(data) >= {"spec", "method", "seed", "rows", "gaps", "monotone", "degenerate_resamples"}
    json.dumps(data)


def test_mc_scan():
    report = monotonicity_scan(DistributionSpec("G", 2), 3, 30, "mc", effort=4000, seed=1)
    assert report.monotone
    assert report.estimates[0].value == 3
    assert all(e.error >= 0 for e in report.estimates)


def test_spherical_scan_routes_through_h():
    s = monotonicity_scan(DistributionSpec("S", 2, alpha=0.0), 3, 40, "quad")
    h = monotonicity_scan(DistributionSpec("H", 2, beta=1.5), 3, 40, "quad")
    assert s.monotone
    assert [e.value for e in s.estimates] == [e.value for e in h.estimates]


def test_uniform_half_sphere_increments_shrink():
    spec = DistributionSpec("S", 2, alpha=0.0)
    values = [expect_quad(spec, n).value for n in (3, 10, 50, 200, 500)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert direct_gap_quad(spec, 500)[0] < direct_gap_quad(spec, 50)[0] < direct_gap_quad(spec, 5)[0]


@pytest.mark.parametrize("spec", [
    DistributionSpec("H", 2, beta=2.0), DistributionSpec("B", 3, beta=1.0),
    DistributionSpec("U", 3), DistributionSpec("G", 2), DistributionSpec("H", 4, beta=2.2),
], ids=str)
@pytest.mark.parametrize("weight", [BetaWeight(0, 0), BetaWeight(1.0, 3.0), BetaWeight(-0.5, 7.0)], ids=repr)
@pytest.mark.parametrize("root", [0.1, 0.5, 0.8])
def test_concave_comparison_gap_positive(spec, weight, root):
    gap = concave_comparison_gap(weight, Line(-1.0, root), marginal_model(spec))
    assert gap > 0


def test_concave_comparison_gap_equality_and_rejection():
    assert concave_comparison_gap(BetaWeight(), Line(-2.0, 0.3), LinearKernel(1.5, 3)) == pytest.approx(0.0, abs=1e-14)

    class Convex:
        d = 2

        def L(self, s):
            return np.asarray(s) ** 2 + 0.1

        def Lpp(self, s):
            return np.full_like(np.asarray(s, dtype=float), 2.0)

    with pytest.raises(ConcavityError):
        concave_comparison_gap(BetaWeight(), Line(-1.0, 0.5), Convex())
    with pytest.raises(DomainError):
        Line(1.0, 0.5)
    with pytest.raises(DomainError):
        Line(-1.0, 1.0)
    with pytest.raises(DomainError):
        BetaWeight(-1.0, 0.0)

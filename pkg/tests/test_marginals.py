import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from facetmono import (
    DistributionSpec,
    DomainError,
    QuantileRangeError,
    draw,
    kernel_L,
    kernel_Lp,
    kernel_Lpp,
    marginal_cdf,
    marginal_model,
    marginal_pdf,
    marginal_quantile,
)

S_GRID = np.linspace(0.01, 0.99, 97)


def fd(fun, s, order):
    """Centered differences with two Richardson steps, step scaled to the distance to 0 and 1."""
    h = 0.05 * np.minimum(s, 1 - s)

    def central(step):
        if order == 1:
            return (fun(s + step) - fun(s - step)) / (2 * step)
        return (fun(s + step) - 2 * fun(s) + fun(s - step)) / step**2

    a, b, c = central(h), central(h / 2), central(h / 4)
    ab, bc = (4 * b - a) / 3, (4 * c - b) / 3
    return (16 * bc - ab) / 15


def reference(spec):
    """Marginals from scipy.stats, independent of the incomplete beta code."""
    d = spec.d
    if spec.family == "G":
        return stats.norm()
    if spec.family == "H":
        nu = 2 * spec.beta - d
        return stats.t(nu, scale=1 / math.sqrt(nu))
    e = (d - 1) / 2 + (spec.beta if spec.family == "B" else -1.0)
    return stats.beta(e + 1, e + 1, loc=-1, scale=2)


def test_pdf_examples():
    assert marginal_pdf(marginal_model(DistributionSpec("U", 3)), 0.3) == pytest.approx(0.5)
    assert marginal_pdf(marginal_model(DistributionSpec("H", 2, beta=2.0)), 0.0) == pytest.approx(0.5)
    assert marginal_pdf(marginal_model(DistributionSpec("B", 2, beta=0.0)), 0.0) == pytest.approx(2 / math.pi)
    with pytest.raises(DomainError):
        marginal_pdf(marginal_model(DistributionSpec("B", 2, beta=0.0)), 1.2)


def test_cdf_quantile_examples():
    u = marginal_model(DistributionSpec("U", 3))
    assert marginal_cdf(u, 0.4) == pytest.approx(0.7, rel=1e-12)
    assert marginal_quantile(u, 0.75) == pytest.approx(0.5, rel=1e-12)
    h = marginal_model(DistributionSpec("H", 2, beta=2.0))
    ref, _ = integrate.quad(lambda x: marginal_pdf(h, x), -np.inf, 1.0, epsabs=1e-13, epsrel=1e-13)
    assert marginal_cdf(h, 1.0) == pytest.approx(ref, abs=1e-10)
    b = marginal_model(DistributionSpec("B", 2, beta=0.0))
    root = optimize.bisect(lambda x: marginal_cdf(b, x) - 0.9, -1, 1, xtol=1e-15, maxiter=128)
    assert marginal_quantile(b, 0.9) == pytest.approx(root, abs=1e-13)
    for s in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            marginal_quantile(b, s)


def test_pdf_and_cdf_against_scipy(grid_spec):
    m = marginal_model(grid_spec)
    ref = reference(grid_spec)
    x = np.linspace(-0.95, 0.95, 41) if m.bounded else np.linspace(-30, 30, 41)
    np.testing.assert_allclose(m.pdf(x), ref.pdf(x), rtol=1e-12)
    np.testing.assert_allclose(m.cdf(x), ref.cdf(x), rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(m.sf(x), ref.sf(x), rtol=1e-12, atol=1e-300)
    assert m.cdf(0.0) == 0.5


def test_quantile_inverts_cdf(grid_spec):
    m = marginal_model(grid_spec)
    s = np.concatenate([np.geomspace(1e-6, 0.5, 60), 1 - np.geomspace(1e-6, 0.5, 60)])
    np.testing.assert_allclose(m.cdf(m.quantile(s)), s, rtol=1e-10, atol=1e-14)
    assert np.all(np.diff(m.quantile(np.sort(s))) >= 0)


@settings(max_examples=60, deadline=None)
@given(d=st.integers(2, 6), excess=st.floats(0.05, 8.0), s=st.floats(1e-6, 1 - 1e-6))
def test_h_quantile_roundtrip_property(d, excess, s):
    m = marginal_model(DistributionSpec("H", d, beta=d / 2 + excess))
    assert m.cdf(m.quantile(s)) == pytest.approx(s, rel=1e-10, abs=1e-14)


def test_heavy_tail_quantile_raises():
    m = marginal_model(DistributionSpec("H", 2, beta=1.0 + 1e-3))
    with pytest.raises(QuantileRangeError):
        m.quantile(1 - 1e-9)


def test_kernel_symmetry_and_positivity(grid_spec):
    m = marginal_model(grid_spec)
    L = kernel_L(m, S_GRID)
    assert np.all(L > 0)
    np.testing.assert_allclose(L, kernel_L(m, 1 - S_GRID), rtol=1e-9)


def test_kernel_values_at_median():
    # L(1/2) = f(0) psi(0); for H(d=2, beta=2) f(0) = 1/2 and L''(1/2) = -(2/f(0)) (beta - d/2)
    m = marginal_model(DistributionSpec("H", 2, beta=2.0))
    assert kernel_L(m, 0.5) == pytest.approx(0.5, rel=1e-14)
    assert kernel_Lp(m, 0.5) == pytest.approx(0.0, abs=1e-14)
    assert kernel_Lpp(m, 0.5) == pytest.approx(-4.0, rel=1e-14)
    assert fd(lambda s: kernel_L(m, s), np.array([0.5]), 2)[0] == pytest.approx(-4.0, rel=1e-6)


def test_circle_kernel_is_constant():
    m = marginal_model(DistributionSpec("U", 2))
    np.testing.assert_allclose(kernel_L(m, S_GRID), 1 / math.pi, rtol=1e-12)
    np.testing.assert_allclose(kernel_Lpp(m, S_GRID), 0.0, atol=1e-15)


@pytest.mark.parametrize("spec", [
    DistributionSpec("H", 2, beta=1.5),
    DistributionSpec("H", 5, beta=6.0),
    DistributionSpec("B", 2, beta=-0.5),
    DistributionSpec("B", 4, beta=2.5),
    DistributionSpec("U", 4),
    DistributionSpec("G", 4),
], ids=str)
def test_derivatives_match_finite_differences(spec):
    m = marginal_model(spec)
    fd1 = fd(lambda s: kernel_L(m, s), S_GRID, 1)
    fd2 = fd(lambda s: kernel_L(m, s), S_GRID, 2)
    scale1 = np.max(np.abs(kernel_Lp(m, S_GRID)))
    np.testing.assert_allclose(fd1, kernel_Lp(m, S_GRID), rtol=1e-6, atol=1e-6 * scale1)
    np.testing.assert_allclose(fd2, kernel_Lpp(m, S_GRID), rtol=1e-6)
    assert np.all(kernel_Lpp(m, S_GRID) < 0)


@pytest.mark.parametrize("d, beta", [(2, 1.5), (3, 2.0), (4, 3.7)])
def test_h_marginal_is_one_dimensional_h(d, beta):
    # the marginal is the d = 1 member with beta' = beta - (d - 1)/2
    b1 = beta - (d - 1) / 2
    log_c1 = math.lgamma(b1) - math.lgamma(b1 - 0.5) - 0.5 * math.log(math.pi)
    m = marginal_model(DistributionSpec("H", d, beta=beta))
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(m.pdf(x), np.exp(log_c1 - b1 * np.log1p(x * x)), rtol=1e-13)


def test_first_coordinate_law(grid_spec):
    x = draw(grid_spec, 20000, 1, 17, (0,))[0][:, 0]
    m = marginal_model(grid_spec)
    assert stats.kstest(x, m.cdf).statistic < 1.63 / math.sqrt(x.size)


def test_marginal_ignores_scale():
    a = marginal_model(DistributionSpec("H", 3, beta=2.0, sigma=4.0))
    b = marginal_model(DistributionSpec("H", 3, beta=2.0))
    assert a == b
    with pytest.raises(DomainError):
        marginal_model(DistributionSpec("S", 2, alpha=0.0))

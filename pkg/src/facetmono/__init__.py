"""Mean facet numbers of random convex hulls and their monotonicity in n."""

from .distributions import (
    BLOCK_SIZE,
    FAMILIES,
    DistributionSpec,
    PointCloud,
    density,
    draw,
    log_density,
    read_cloud_csv,
    sample,
    write_cloud_csv,
)
from .errors import (
    ConcavityError,
    DegenerateSampleError,
    DomainError,
    QuadratureError,
    QuantileRangeError,
)
from .estimators import (
    BetaWeight,
    Estimate,
    Line,
    LinearKernel,
    ScanReport,
    concave_comparison_gap,
    direct_gap_quad,
    expect_mc,
    expect_quad,
    facet_probability_quad,
    mc_prefix_counts,
    monotonicity_scan,
)
from .hull import HullSummary, facet_count_drops, facet_oracle, hull_facets, prefix_facet_counts
from .marginals import (
    MarginalModel,
    kernel_L,
    kernel_Lp,
    kernel_Lpp,
    marginal_cdf,
    marginal_model,
    marginal_pdf,
    marginal_quantile,
)
from .sphere import (
    GnomonicMap,
    euclidean_equivalent,
    gnomonic,
    gnomonic_inv,
    gnomonic_jacobian,
    spherical_equivalent,
    spherical_hull_facets,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

"""Exact numerics for shuffled randomized response in the critical window."""

from .distcore import (
    IntDist,
    TVInterval,
    affine_map,
    bessel_i,
    convolve,
    make_bernoulli,
    make_binomial,
    make_poisson,
    make_skellam,
    point_mass,
    std_normal_cdf,
    tv_distance,
)
from .lattice import LatticeDist
from .curves import (
    DeltaResult,
    TradeoffCurve,
    curve_stability_bound,
    delta_from_tradeoff,
    delta_np,
    floor_lower_bound,
    tradeoff_generic,
)
from .rr import (
    RRConfig,
    ScoredLaw,
    canonical_pair,
    composition_pair,
    likelihood_ratio_canonical,
    loglr_law,
    rr_config,
)
from .limits import (
    IntensitySpec,
    LimitParams,
    boundary_factorization,
    compound_poisson_limit,
    poisson_shift_delta_closed,
    poisson_shift_pair,
    poisson_shift_tradeoff,
    skellam_shift_pair,
)
from .bounds import (
    cint_constant,
    multivariate_bounds,
    poisson_bounds,
    poisson_sharp_lower,
    rate_sweep,
    skellam_bounds,
)
from .regimes import (
    classify_regime,
    gaussian_edge_compare,
    hidden_count_diagnostic,
    noncommuting_demo,
    subcritical_gaussian_check,
    supercritical_diagnostic,
)
from .coupling import (
    CouplingReport,
    SeededStream,
    couple_binom_poisson,
    couple_multinomial_poisson,
    couple_poisson_poisson,
)
from .channels import SparseChannel, TwoDominantSpec, channel_from_intensities, parse_channel_spec
from .multivariate import exact_histogram_pair
from .hybrid import (
    HybridModel,
    hybrid_cf,
    hybrid_delta_gap,
    hybrid_mc_sample,
    hybrid_setup,
    project_jump_pair,
    projected_limit_pair,
)

__version__ = "0.1.0"

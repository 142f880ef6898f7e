"""Simulation and numerical checks for the scaled median of independent
Brownian motions and its Gaussian limit."""
from .estimates import MCEstimate
from .kernel import (
    DegradedPrecisionWarning,
    ExpansionResult,
    JumpQuery,
    WalkParams,
    increment_variance,
    limit_covariance,
    median_cdf,
    median_density,
    median_rank,
    mills_upper_bound,
    p1,
    p1_expansion,
    p2,
    p2_expansion,
    psi,
    psi_expansion,
    std_normal_cdf,
    std_normal_pdf,
    tail_bound_check,
    walk_params,
)
from .limit import (
    CovMatrix,
    brownian_control_slope,
    covariance_matrix,
    holder_scaling_estimate,
    sample_limit,
)
from .paths import (
    EnsembleSpec,
    MedianPath,
    TimeGrid,
    componentwise_median_sample,
    jump_frequency,
    jump_probability,
    scaling_law_samples,
    simulate_median_path,
    simulate_median_paths,
)
from .verify import (
    VerificationReport,
    estimate_covariance,
    ks_2samp_distance,
    ks_distance,
    verify_cond_inequality,
    verify_expansion_certificates,
    verify_key_estimate,
    verify_split_bound,
)
from .walk import (
    TrinomialSpec,
    WalkDistribution,
    binom_gauss_ratio,
    cheby_bound_shape,
    chebyplus_bound_shape,
    exact_distribution,
    mc_phi_k,
    phi_k,
    recip_moment,
)

__version__ = "0.1.0"

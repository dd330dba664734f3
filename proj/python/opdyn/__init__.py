"""Noisy opinion dynamics on networks.

Simulation of DeGroot and Friedkin-Johnsen dynamics with i.i.d. or adaptive
(uniqueness-seeking) noise, closed-form spectral predictions of stationary
opinion diversity, and Granger-causality influence-network analysis.
"""

from opdyn._core import (
    BHOutcome,
    EnsembleResult,
    Graph,
    InfluenceNetwork,
    KSResult,
    ModelSpec,
    NetworkFeatures,
    RegressionFit,
    ReplicaStats,
    Spectrum,
    TrustMatrix,
    __version__,
    bh_correct,
    build_influence_network,
    degroot,
    dispersion,
    diversity_degroot,
    diversity_directed_bound,
    diversity_fj,
    empirical_diversity,
    features,
    fit_ols,
    fj_fixed_point,
    friedkin_johnsen,
    generate,
    granger_pvalue,
    ks_test,
    marginal_contributions,
    normal_cdf,
    run_ensemble,
    simulate,
    spectrum,
    trust_matrix,
)

__all__ = [
    "BHOutcome",
    "EnsembleResult",
    "Graph",
    "InfluenceNetwork",
    "KSResult",
    "ModelSpec",
    "NetworkFeatures",
    "RegressionFit",
    "ReplicaStats",
    "Spectrum",
    "TrustMatrix",
    "__version__",
    "bh_correct",
    "build_influence_network",
    "degroot",
    "dispersion",
    "diversity_degroot",
    "diversity_directed_bound",
    "diversity_fj",
    "empirical_diversity",
    "features",
    "fit_ols",
    "fj_fixed_point",
    "friedkin_johnsen",
    "generate",
    "granger_pvalue",
    "ks_test",
    "marginal_contributions",
    "normal_cdf",
    "run_ensemble",
    "simulate",
    "spectrum",
    "trust_matrix",
]

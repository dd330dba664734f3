#pragma once

#include <vector>

#include "opdyn/trust.hpp"

namespace opdyn {

/// Real eigenvalue sequence of a trust matrix, sorted descending.
/// has_complex flags spectra whose imaginary parts were discarded (genuinely
/// directed matrices); the exact diversity expressions refuse those.
struct Spectrum {
    std::vector<double> eigenvalues;  // lambda_1 >= ... >= lambda_N
    bool has_complex = false;

    int size() const { return static_cast<int>(eigenvalues.size()); }

    /// Wraps an externally chosen real sequence (e.g. the real parts of a
    /// directed spectrum that the caller deliberately treats as real).
    static Spectrum from_values(std::vector<double> values);
};

/// Eigenvalues of a trust matrix.
///
/// Row-normalized matrices of undirected graphs are similar to the symmetric
/// matrix D^{-1/2} W D^{-1/2}, so their spectrum is computed with a symmetric
/// solver and is exactly real. Genuinely directed matrices go through a
/// general solver; only the real parts are kept and has_complex is set when
/// imaginary parts were non-negligible.
Spectrum spectrum(const TrustMatrix& a);

enum class PredictionKind { ExactUndirected, UpperBoundDirected };

struct DiversityPrediction {
    double d = 0.0;
    PredictionKind kind = PredictionKind::ExactUndirected;
};

/// Stationary opinion diversity of the noisy weighted-averaging model with
/// i.i.d. N(0, sigma2) shocks:
///
///     d = (sigma2 / N) * sum_i 1 / (1 - lambda_i^2)
///
/// Requires |lambda_i| < 1 for all i and a real spectrum.
DiversityPrediction diversity_degroot(const Spectrum& s, double sigma2);

/// Stationary diversity of the noisy anchored model with uniform
/// susceptibility s in [0, 1] and i.i.d. prejudices of variance xi2:
///
///     d = (1/N) (sigma2 + (1-s)^2 xi2) * sum_i 1 / (1 - s^2 lambda_i^2)
///
/// At s = 1 this reduces to diversity_degroot; at s = 0 it equals
/// sigma2 + xi2 independently of the spectrum.
DiversityPrediction diversity_fj(const Spectrum& s, double sigma2, double xi2,
                                 double susceptibility);

/// Upper bound valid for directed matrices (applied to the real parts):
///
///     d <= (sigma2 / N) * sum_i sum_j 1 / (1 - lambda_i lambda_j)
///
/// For symmetric inputs the diagonal terms alone reproduce the exact value,
/// so the bound always dominates it.
DiversityPrediction diversity_directed_bound(const Spectrum& s, double sigma2);

/// Per-eigenvalue contribution 1 / (1 - lambda_i^2), in spectrum order.
/// sum(marginal_contributions) * sigma2 / N == diversity_degroot exactly.
std::vector<double> marginal_contributions(const Spectrum& s);

}  // namespace opdyn

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace opdyn {

/// Gaussian CDF Phi((x - mean) / sqrt(variance)), evaluated through erfc.
/// variance must be > 0.
double normal_cdf(double x, double mean, double variance);

/// Survival function of the Kolmogorov distribution,
/// Q(t) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 t^2), 20 terms
/// (theta-dual form below t = 1 for numerical accuracy).
double kolmogorov_sf(double t);

struct KSResult {
    double d_stat = 0.0;   // supremum CDF gap in [0, 1]
    double p_value = 1.0;  // asymptotic, from kolmogorov_sf(sqrt(n) * d_stat)
    std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test of samples against N(mean, variance).
/// The reference parameters are fixed a priori, not estimated from the data.
KSResult ks_test(std::span<const double> samples, double mean, double variance);

struct BHOutcome {
    std::vector<bool> rejected;              // per input hypothesis
    std::size_t adjusted_threshold_rank = 0; // k*, number of rejections
    double alpha = 0.0;
};

/// Benjamini-Hochberg step-up FDR control: sort p-values ascending (ties by
/// original index), find the largest k with p_(k) <= k * alpha / m, reject the
/// k smallest.
BHOutcome bh_correct(std::span<const double> p_values, double alpha);

struct DispersionResult {
    double msd = 0.0;  // mean squared deviation from the sample mean
    double mad = 0.0;  // median absolute deviation from the sample median
};

DispersionResult dispersion(std::span<const double> samples);

}  // namespace opdyn

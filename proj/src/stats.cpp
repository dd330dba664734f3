#include "opdyn/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace opdyn {

double normal_cdf(double x, double mean, double variance) {
    if (!(variance > 0.0)) throw std::domain_error("normal_cdf: variance must be > 0");
    const double z = (x - mean) / std::sqrt(variance);
    return 0.5 * std::erfc(-z / 1.4142135623730950488);
}

double kolmogorov_sf(double t) {
    if (t <= 0.0) return 1.0;
    constexpr int kTerms = 20;
    double q;
    if (t < 1.0) {
        // Jacobi-theta dual of the alternating series; converges fast for small t.
        double cdf = 0.0;
        const double c = 9.869604401089358 / (8.0 * t * t);  // pi^2 / (8 t^2)
        for (int k = 1; k <= kTerms; ++k) {
            const double m = 2.0 * k - 1.0;
            cdf += std::exp(-c * m * m);
        }
        q = 1.0 - 2.5066282746310002 / t * cdf;  // sqrt(2*pi)/t * sum
    } else {
        double sum = 0.0;
        double sign = 1.0;
        for (int k = 1; k <= kTerms; ++k) {
            sum += sign * std::exp(-2.0 * k * k * t * t);
            sign = -sign;
        }
        q = 2.0 * sum;
    }
    return std::clamp(q, 0.0, 1.0);
}

KSResult ks_test(std::span<const double> samples, double mean, double variance) {
    if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
    if (!(variance > 0.0)) throw std::domain_error("ks_test: variance must be > 0");

    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());

    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double g = normal_cdf(sorted[i], mean, variance);
        const double upper = (static_cast<double>(i) + 1.0) / n - g;
        const double lower = g - static_cast<double>(i) / n;
        d = std::max(d, std::max(upper, lower));
    }

    KSResult r;
    r.d_stat = d;
    r.n = sorted.size();
    r.p_value = kolmogorov_sf(std::sqrt(n) * d);
    return r;
}

BHOutcome bh_correct(std::span<const double> p_values, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("bh_correct: alpha must lie in (0, 1)");
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("bh_correct: p-values must lie in [0, 1]");

    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::size_t threshold_rank = 0;
    for (std::size_t k = m; k >= 1; --k) {
        if (p_values[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) {
            threshold_rank = k;
            break;
        }
    }

    BHOutcome out;
    out.alpha = alpha;
    out.adjusted_threshold_rank = threshold_rank;
    out.rejected.assign(m, false);
    for (std::size_t k = 0; k < threshold_rank; ++k) out.rejected[order[k]] = true;
    return out;
}

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    return 0.5 * (v[mid - 1] + hi);
}

}  // namespace

DispersionResult dispersion(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("dispersion: empty sample");
    const double n = static_cast<double>(samples.size());

    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double msd = 0.0;
    for (double x : samples) msd += (x - mean) * (x - mean);
    msd /= n;

    std::vector<double> work(samples.begin(), samples.end());
    const double med = median_inplace(work);
    for (double& x : work) x = std::abs(x - med);
    const double mad = median_inplace(work);

    return {msd, mad};
}

}  // namespace opdyn

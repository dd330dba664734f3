#include "opdyn/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace opdyn {

Spectrum Spectrum::from_values(std::vector<double> values) {
    Spectrum s;
    s.eigenvalues = std::move(values);
    std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), std::greater<double>());
    return s;
}

namespace {

Spectrum from_symmetric(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectrum: symmetric eigensolver failed to converge");
    std::vector<double> values(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + solver.eigenvalues().size());
    return Spectrum::from_values(std::move(values));
}

bool nearly_symmetric(const Eigen::MatrixXd& m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12) return false;
    return true;
}

}  // namespace

Spectrum spectrum(const TrustMatrix& a) {
    const int n = a.size();
    if (n == 0) throw std::invalid_argument("spectrum: empty matrix");

    if (nearly_symmetric(a.matrix())) return from_symmetric(a.matrix());

    const auto& scale = a.symmetrizing_scale();
    if (!scale.empty()) {
        // Similarity transform to D^{-1/2} W D^{-1/2}; real by symmetry.
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i) {
            const double si = std::sqrt(scale[i]);
            for (int j = 0; j < n; ++j) m(i, j) = si * a.matrix()(i, j) / std::sqrt(scale[j]);
        }
        m = 0.5 * (m + m.transpose().eval());  // scrub rounding asymmetry
        return from_symmetric(m);
    }

    Eigen::EigenSolver<Eigen::MatrixXd> solver(a.matrix(), /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectrum: eigensolver failed to converge");
    std::vector<double> real_parts(n);
    bool has_complex = false;
    for (int i = 0; i < n; ++i) {
        const auto ev = solver.eigenvalues()(i);
        real_parts[i] = ev.real();
        if (std::abs(ev.imag()) > 1e-9 * std::max(1.0, std::abs(ev.real()))) has_complex = true;
    }
    Spectrum s = Spectrum::from_values(std::move(real_parts));
    s.has_complex = has_complex;
    return s;
}

namespace {

void check_spectrum(const Spectrum& s, double sigma2) {
    if (s.size() == 0) throw std::invalid_argument("diversity: empty spectrum");
    if (!(sigma2 >= 0.0)) throw std::domain_error("diversity: sigma2 must be >= 0");
}

}  // namespace

std::vector<double> marginal_contributions(const Spectrum& s) {
    std::vector<double> out;
    out.reserve(s.eigenvalues.size());
    for (double lambda : s.eigenvalues) {
        if (std::abs(lambda) >= 1.0)
            throw std::domain_error(
                "diversity: |lambda| >= 1, the process is not stationary");
        out.push_back(1.0 / (1.0 - lambda * lambda));
    }
    return out;
}

DiversityPrediction diversity_degroot(const Spectrum& s, double sigma2) {
    check_spectrum(s, sigma2);
    if (s.has_complex)
        throw std::domain_error(
            "diversity_degroot: spectrum has complex eigenvalues; only the "
            "directed upper bound is defined");
    const auto contributions = marginal_contributions(s);
    const double sum = std::accumulate(contributions.begin(), contributions.end(), 0.0);
    return {sigma2 / static_cast<double>(s.size()) * sum, PredictionKind::ExactUndirected};
}

DiversityPrediction diversity_fj(const Spectrum& s, double sigma2, double xi2,
                                 double susceptibility) {
    check_spectrum(s, sigma2);
    if (!(xi2 >= 0.0)) throw std::domain_error("diversity_fj: xi2 must be >= 0");
    if (!(susceptibility >= 0.0 && susceptibility <= 1.0))
        throw std::domain_error("diversity_fj: susceptibility must lie in [0, 1]");
    if (s.has_complex)
        throw std::domain_error(
            "diversity_fj: spectrum has complex eigenvalues; only the directed "
            "upper bound is defined");
    double sum = 0.0;
    for (double lambda : s.eigenvalues) {
        const double sl = susceptibility * lambda;
        if (std::abs(sl) >= 1.0)
            throw std::domain_error("diversity_fj: s*|lambda| >= 1, not stationary");
        sum += 1.0 / (1.0 - sl * sl);
    }
    const double scale = sigma2 + (1.0 - susceptibility) * (1.0 - susceptibility) * xi2;
    return {scale * (sum / static_cast<double>(s.size())), PredictionKind::ExactUndirected};
}

DiversityPrediction diversity_directed_bound(const Spectrum& s, double sigma2) {
    check_spectrum(s, sigma2);
    for (double lambda : s.eigenvalues)
        if (std::abs(lambda) >= 1.0)
            throw std::domain_error("diversity_directed_bound: |lambda| >= 1");
    double sum = 0.0;
    for (double li : s.eigenvalues)
        for (double lj : s.eigenvalues) sum += 1.0 / (1.0 - li * lj);
    return {sigma2 / static_cast<double>(s.size()) * sum, PredictionKind::UpperBoundDirected};
}

}  // namespace opdyn

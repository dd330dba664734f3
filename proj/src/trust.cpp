#include "opdyn/trust.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace opdyn {

TrustMatrix TrustMatrix::from_graph(const UndirectedGraph& g, double eta) {
    if (!(eta > 0.0))
        throw std::invalid_argument(
            "trust_matrix: eta must be > 0 (stationarity requires a strictly "
            "substochastic matrix)");
    if (g.n > kMaxDense)
        throw std::invalid_argument("trust_matrix: dense representation capped at " +
                                    std::to_string(kMaxDense) + " nodes");

    TrustMatrix t;
    t.eta_ = eta;
    t.directed_ = false;
    t.m_ = Eigen::MatrixXd::Zero(g.n, g.n);
    t.support_.resize(g.n);
    t.scale_.resize(g.n);
    for (int i = 0; i < g.n; ++i) {
        const int k = g.degree(i);
        if (k < 1)
            throw std::invalid_argument("trust_matrix: node " + std::to_string(i) +
                                        " has no incident edges");
        const double w = 1.0 / (static_cast<double>(k) * (1.0 + eta));
        t.scale_[i] = static_cast<double>(k) * (1.0 + eta);
        auto& support = t.support_[i];
        support.reserve(static_cast<std::size_t>(k));
        if (g.self_loops) {
            // keep support sorted: neighbors below i, then i, then the rest
            for (int j : g.adj[i])
                if (j < i) support.push_back(j);
            support.push_back(i);
            for (int j : g.adj[i])
                if (j > i) support.push_back(j);
            t.m_(i, i) = w;
        } else {
            support.assign(g.adj[i].begin(), g.adj[i].end());
        }
        for (int j : g.adj[i]) t.m_(i, j) = w;
    }
    return t;
}

TrustMatrix TrustMatrix::from_dense(Eigen::MatrixXd m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("TrustMatrix: matrix must be square");
    if (m.rows() > kMaxDense)
        throw std::invalid_argument("TrustMatrix: dense representation capped at " +
                                    std::to_string(kMaxDense) + " nodes");
    const int n = static_cast<int>(m.rows());
    if (n > 0 && m.minCoeff() < 0.0)
        throw std::invalid_argument("TrustMatrix: weights must be non-negative");

    TrustMatrix t;
    double max_row = 0.0;
    for (int i = 0; i < n; ++i) max_row = std::max(max_row, m.row(i).sum());
    if (max_row > 1.0 + 1e-12)
        throw std::invalid_argument("TrustMatrix: row sums must not exceed 1");
    t.eta_ = max_row > 0.0 ? 1.0 / max_row - 1.0 : std::numeric_limits<double>::infinity();

    double asym = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
    t.directed_ = asym > 1e-12;

    t.support_.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (m(i, j) > 0.0) t.support_[i].push_back(j);
    t.m_ = std::move(m);
    return t;
}

TrustMatrix trust_matrix(const UndirectedGraph& g, double eta) {
    return TrustMatrix::from_graph(g, eta);
}

}  // namespace opdyn

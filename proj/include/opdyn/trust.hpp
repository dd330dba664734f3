#pragma once

#include <Eigen/Core>
#include <vector>

#include "opdyn/graph.hpp"

namespace opdyn {

/// Row-substochastic weighted adjacency matrix. Entry (i, j) is the weight
/// node i places on node j's previous opinion; every row of a graph-built
/// matrix sums to exactly 1/(1+eta) < 1.
///
/// Dense storage, capped at kMaxDense nodes.
class TrustMatrix {
public:
    static constexpr int kMaxDense = 2000;

    /// Degree-normalized weights 1/(k_i (1+eta)) on each of node i's k_i
    /// incident edges, the self-edge included in k_i. Requires eta > 0
    /// (strict substochasticity) and degree >= 1 everywhere.
    static TrustMatrix from_graph(const UndirectedGraph& g, double eta);

    /// Wraps an arbitrary non-negative matrix with row sums <= 1.
    /// Marked directed unless numerically symmetric.
    static TrustMatrix from_dense(Eigen::MatrixXd m);

    int size() const { return static_cast<int>(m_.rows()); }
    double eta() const { return eta_; }
    bool directed() const { return directed_; }
    const Eigen::MatrixXd& matrix() const { return m_; }

    /// Nonzero column indices per row (self included); used by neighborhood
    /// noise kernels to skip zero weights.
    const std::vector<std::vector<int>>& row_support() const { return support_; }

    /// Row scales d_i = k_i (1+eta) when built from an undirected graph,
    /// enabling the symmetric similarity transform D^{1/2} A D^{-1/2};
    /// empty otherwise.
    const std::vector<double>& symmetrizing_scale() const { return scale_; }

    Eigen::VectorXd row_sums() const { return m_.rowwise().sum(); }
    double max_row_sum() const { return size() == 0 ? 0.0 : m_.rowwise().sum().maxCoeff(); }

private:
    TrustMatrix() = default;

    Eigen::MatrixXd m_;
    double eta_ = 0.0;
    bool directed_ = false;
    std::vector<std::vector<int>> support_;
    std::vector<double> scale_;
};

/// Spec-facing alias of TrustMatrix::from_graph.
TrustMatrix trust_matrix(const UndirectedGraph& g, double eta);

}  // namespace opdyn

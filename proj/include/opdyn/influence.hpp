#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "opdyn/graph.hpp"
#include "opdyn/trust.hpp"

namespace opdyn {

/// Per-topic opinion panel: T time stamps by N sources of sentiment scores.
/// Ingestion drops (and counts) time rows with any missing cell.
struct OpinionPanel {
    std::string topic;
    std::vector<double> times;           // ordered
    std::vector<std::string> sources;
    Eigen::MatrixXd values;              // T x N
    std::size_t dropped_rows = 0;
};

struct GrangerConfig {
    int max_lag = 5;
    double alpha = 0.05;  // FDR level for the BH-corrected edge family
};

/// p-value of the joint F-test that all lags of x are irrelevant when
/// predicting y from its own lags (restricted AR(max_lag) vs the model with
/// x's lags added). Throws on rank-deficient designs (e.g. x == y) and on
/// series shorter than 3 * max_lag + 4.
double granger_pvalue(std::span<const double> x, std::span<const double> y, int max_lag);

struct DirectedEdge {
    int src = 0;
    int dst = 0;
    double p_value = 1.0;
};

/// Directed Granger-causality network over a panel's sources: every ordered
/// pair is tested and the whole p-value family is BH-corrected at cfg.alpha;
/// pairs whose test degenerates (constant or collinear series) are kept in
/// the family with p = 1.
struct InfluenceNetwork {
    int n = 0;
    std::vector<DirectedEdge> edges;       // rejected pairs only, src -> dst
    std::size_t tested_pairs = 0;
    std::size_t degenerate_pairs = 0;
};

InfluenceNetwork build_influence_network(const OpinionPanel& panel, const GrangerConfig& cfg,
                                         int jobs = 1);

/// Realized cross-sectional diversity of a panel: the per-time population
/// variance (divide by N) averaged over time. Requires >= 2 sources.
double empirical_diversity(const OpinionPanel& panel);

struct RegressionFit {
    std::vector<std::string> terms;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd t_statistics;
    Eigen::VectorXd p_values;
    double r_squared = 0.0;
    std::size_t n_obs = 0;

    int term_index(const std::string& term) const;  // -1 when absent
};

/// Ordinary least squares of y on the columns of X (pass the intercept as a
/// column). Coefficients via column-pivoted QR; standard errors from
/// sigma_hat^2 (X^T X)^{-1}; two-sided t-test p-values. Throws on
/// rank-deficient or underdetermined designs.
RegressionFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      std::vector<std::string> terms = {});

/// One network's row in the diversity regressions.
struct RegressionObservation {
    std::string label;
    NetworkFeatures features;
    double predicted_d = 0.0;
    double realized_diversity = 0.0;  // y_k, must be > 0 (the response is log y)
};

struct RegressionSuite {
    RegressionFit m1;  // log(y) ~ 1 + L + N + C + D
    RegressionFit m2;  // log(y) ~ 1 + d
    RegressionFit m3;  // log(y) ~ 1 + L + N + C + D + d
    std::size_t used = 0;
    std::size_t dropped = 0;  // rows without a path length or with y <= 0
};

/// Fits the three nested diversity models on the common subset of
/// observations with complete covariates, so the in-sample R^2 values are
/// directly comparable (M3 >= max(M1, M2) by nesting).
RegressionSuite run_regressions(const std::vector<RegressionObservation>& observations);

/// Undirected skeleton of an influence network (edge when either direction
/// was detected); used for the topology covariates L, C, D.
UndirectedGraph undirected_skeleton(const InfluenceNetwork& net);

/// Row-substochastic trust matrix of the directed influence network: node i's
/// row spreads 1/(k_i (1+eta)) over its detected influencers plus itself.
TrustMatrix influence_trust_matrix(const InfluenceNetwork& net, double eta);

/// Full per-topic pipeline result: inferred network, its skeleton features,
/// the spectral diversity prediction (real parts of the directed spectrum)
/// with the directed upper bound, and the realized diversity y_k.
struct TopicAnalysis {
    std::string topic;
    InfluenceNetwork network;
    NetworkFeatures features;
    double predicted_d = 0.0;
    double directed_bound = 0.0;
    double realized_diversity = 0.0;
};

TopicAnalysis analyze_topic(const OpinionPanel& panel, const GrangerConfig& cfg, double eta,
                            int jobs = 1);

/// Long-format ingestion: header `time,source,topic,sentiment`, one file may
/// carry many topics. Topics and sources are ordered lexicographically.
std::vector<OpinionPanel> load_panels_long(const std::string& path);

/// Wide-format ingestion: header `time,<source>,<source>,...`, one topic per
/// file.
OpinionPanel load_panel_wide(const std::string& path, const std::string& topic);

}  // namespace opdyn

#include "opdyn/influence.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "opdyn/csv.hpp"
#include "opdyn/parallel.hpp"
#include "opdyn/spectral.hpp"
#include "opdyn/stats.hpp"

namespace opdyn {

namespace {

double fisher_f_sf(double f, int d1, int d2) {
    if (!std::isfinite(f)) return f > 0 ? 0.0 : 1.0;
    if (f <= 0.0) return 1.0;
    boost::math::fisher_f dist(d1, d2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

double student_t_two_sided(double t, int dof) {
    if (!std::isfinite(t)) return 0.0;
    boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

struct OlsResult {
    Eigen::VectorXd beta;
    double rss = 0.0;
};

OlsResult solve_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < x.cols())
        throw std::invalid_argument("ols: rank-deficient design matrix");
    OlsResult r;
    r.beta = qr.solve(y);
    r.rss = (y - x * r.beta).squaredNorm();
    return r;
}

}  // namespace

double granger_pvalue(std::span<const double> x, std::span<const double> y, int max_lag) {
    if (max_lag < 1) throw std::invalid_argument("granger: max_lag must be >= 1");
    if (x.size() != y.size()) throw std::invalid_argument("granger: unequal series lengths");
    const int t_len = static_cast<int>(y.size());
    if (t_len <= 3 * max_lag + 3)
        throw std::invalid_argument("granger: series too short for the requested lag");

    const int rows = t_len - max_lag;
    const int restricted_cols = 1 + max_lag;
    const int full_cols = 1 + 2 * max_lag;

    Eigen::MatrixXd design(rows, full_cols);
    Eigen::VectorXd response(rows);
    for (int r = 0; r < rows; ++r) {
        const int t = r + max_lag;
        response(r) = y[t];
        design(r, 0) = 1.0;
        for (int l = 1; l <= max_lag; ++l) {
            design(r, l) = y[t - l];
            design(r, max_lag + l) = x[t - l];
        }
    }

    const OlsResult restricted = solve_ols(design.leftCols(restricted_cols), response);
    const OlsResult full = solve_ols(design, response);

    const int df2 = rows - full_cols;
    const double num = std::max(0.0, restricted.rss - full.rss) / static_cast<double>(max_lag);
    const double den = full.rss / static_cast<double>(df2);
    if (den <= 0.0) return 0.0;  // the unrestricted model fits exactly
    return fisher_f_sf(num / den, max_lag, df2);
}

InfluenceNetwork build_influence_network(const OpinionPanel& panel, const GrangerConfig& cfg,
                                         int jobs) {
    if (cfg.max_lag < 1) throw std::invalid_argument("granger: max_lag must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("granger: alpha must lie in (0, 1)");
    const int n = static_cast<int>(panel.sources.size());
    const int t_len = static_cast<int>(panel.values.rows());
    if (n >= 2 && t_len < 10 * cfg.max_lag)
        throw std::invalid_argument("granger: panel needs at least 10 * max_lag time rows");

    InfluenceNetwork net;
    net.n = n;
    if (n < 2) return net;

    struct Pair {
        int src, dst;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) pairs.push_back({i, j});

    std::vector<double> pvals(pairs.size(), 1.0);
    std::vector<char> degenerate(pairs.size(), 0);
    parallel_for(pairs.size(), jobs, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        std::vector<double> xi(panel.values.col(i).data(), panel.values.col(i).data() + t_len);
        std::vector<double> yj(panel.values.col(j).data(), panel.values.col(j).data() + t_len);
        try {
            pvals[k] = granger_pvalue(xi, yj, cfg.max_lag);
        } catch (const std::invalid_argument&) {
            pvals[k] = 1.0;  // constant/collinear pair: keep it in the family, never an edge
            degenerate[k] = 1;
        }
    });

    const BHOutcome bh = bh_correct(pvals, cfg.alpha);
    net.tested_pairs = pairs.size();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (degenerate[k]) ++net.degenerate_pairs;
        if (bh.rejected[k]) net.edges.push_back({pairs[k].src, pairs[k].dst, pvals[k]});
    }
    return net;
}

double empirical_diversity(const OpinionPanel& panel) {
    const int n = static_cast<int>(panel.values.cols());
    const int t_len = static_cast<int>(panel.values.rows());
    if (n < 2) throw std::invalid_argument("empirical_diversity: needs at least 2 sources");
    if (t_len < 1) throw std::invalid_argument("empirical_diversity: empty panel");
    double acc = 0.0;
    for (int t = 0; t < t_len; ++t) {
        const double mean = panel.values.row(t).mean();
        acc += (panel.values.row(t).array() - mean).square().sum() / static_cast<double>(n);
    }
    return acc / static_cast<double>(t_len);
}

int RegressionFit::term_index(const std::string& term) const {
    for (std::size_t i = 0; i < terms.size(); ++i)
        if (terms[i] == term) return static_cast<int>(i);
    return -1;
}

RegressionFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                      std::vector<std::string> terms) {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    if (y.size() != n) throw std::invalid_argument("ols: response length mismatch");
    if (n <= p) throw std::invalid_argument("ols: need more observations than regressors");
    if (!terms.empty() && static_cast<int>(terms.size()) != p)
        throw std::invalid_argument("ols: term names do not match the design width");
    if (terms.empty())
        for (int j = 0; j < p; ++j) terms.push_back("x" + std::to_string(j));

    const OlsResult sol = solve_ols(x, y);
    const double sigma2_hat = sol.rss / static_cast<double>(n - p);
    const Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));

    RegressionFit fit;
    fit.terms = std::move(terms);
    fit.coefficients = sol.beta;
    fit.standard_errors.resize(p);
    fit.t_statistics.resize(p);
    fit.p_values.resize(p);
    for (int j = 0; j < p; ++j) {
        const double se = std::sqrt(std::max(0.0, sigma2_hat * xtx_inv(j, j)));
        fit.standard_errors(j) = se;
        const double t = se > 0.0 ? sol.beta(j) / se
                                  : (sol.beta(j) == 0.0
                                         ? 0.0
                                         : std::numeric_limits<double>::infinity());
        fit.t_statistics(j) = t;
        fit.p_values(j) = student_t_two_sided(t, n - p);
    }

    const double mean = y.mean();
    const double sst = (y.array() - mean).square().sum();
    fit.r_squared = sst > 0.0 ? std::clamp(1.0 - sol.rss / sst, 0.0, 1.0) : 0.0;
    fit.n_obs = static_cast<std::size_t>(n);
    return fit;
}

RegressionSuite run_regressions(const std::vector<RegressionObservation>& observations) {
    std::vector<const RegressionObservation*> usable;
    for (const auto& obs : observations) {
        if (!obs.features.avg_shortest_path) continue;  // disconnected skeleton
        if (!(obs.realized_diversity > 0.0)) continue;  // log response undefined
        if (!std::isfinite(obs.predicted_d)) continue;
        usable.push_back(&obs);
    }

    const int n = static_cast<int>(usable.size());
    if (n < 7)
        throw std::invalid_argument(
            "run_regressions: need at least 7 usable networks (5 regressors + "
            "intercept, with one residual degree of freedom)");

    Eigen::VectorXd log_y(n);
    Eigen::MatrixXd x3(n, 6);
    for (int i = 0; i < n; ++i) {
        const auto& obs = *usable[i];
        log_y(i) = std::log(obs.realized_diversity);
        x3(i, 0) = 1.0;
        x3(i, 1) = *obs.features.avg_shortest_path;
        x3(i, 2) = static_cast<double>(obs.features.size);
        x3(i, 3) = obs.features.avg_clustering;
        x3(i, 4) = obs.features.density;
        x3(i, 5) = obs.predicted_d;
    }

    RegressionSuite suite;
    suite.used = usable.size();
    suite.dropped = observations.size() - usable.size();
    suite.m1 = fit_ols(x3.leftCols(5), log_y, {"intercept", "L", "N", "C", "D"});
    Eigen::MatrixXd x2(n, 2);
    x2.col(0) = x3.col(0);
    x2.col(1) = x3.col(5);
    suite.m2 = fit_ols(x2, log_y, {"intercept", "d"});
    suite.m3 = fit_ols(x3, log_y, {"intercept", "L", "N", "C", "D", "d"});
    return suite;
}

UndirectedGraph undirected_skeleton(const InfluenceNetwork& net) {
    UndirectedGraph g(net.n, /*self_loops=*/false);
    for (const auto& e : net.edges) g.add_edge(e.src, e.dst);
    return g;
}

TrustMatrix influence_trust_matrix(const InfluenceNetwork& net, double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("influence_trust_matrix: eta must be > 0");
    const int n = net.n;
    std::vector<std::vector<int>> influencers(n);
    for (int i = 0; i < n; ++i) influencers[i].push_back(i);  // self-edge
    for (const auto& e : net.edges) influencers[e.dst].push_back(e.src);

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double w = 1.0 / (static_cast<double>(influencers[i].size()) * (1.0 + eta));
        for (int j : influencers[i]) m(i, j) = w;
    }
    return TrustMatrix::from_dense(std::move(m));
}

TopicAnalysis analyze_topic(const OpinionPanel& panel, const GrangerConfig& cfg, double eta,
                            int jobs) {
    TopicAnalysis out;
    out.topic = panel.topic;
    out.realized_diversity = empirical_diversity(panel);
    out.network = build_influence_network(panel, cfg, jobs);
    out.features = features(undirected_skeleton(out.network));

    const TrustMatrix a = influence_trust_matrix(out.network, eta);
    const Spectrum directed = spectrum(a);
    // Exact expression applied to the real parts of the (possibly complex)
    // directed spectrum, with the rigorous directed bound reported alongside.
    const Spectrum as_real = Spectrum::from_values(directed.eigenvalues);
    out.predicted_d = diversity_degroot(as_real, 1.0).d;
    out.directed_bound = diversity_directed_bound(as_real, 1.0).d;
    return out;
}

namespace {

Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    return m;
}

}  // namespace

std::vector<OpinionPanel> load_panels_long(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int time_col = table.column("time");
    const int source_col = table.column("source");
    const int topic_col = table.column("topic");
    const int value_col = table.column("sentiment");
    if (time_col < 0 || source_col < 0 || topic_col < 0 || value_col < 0)
        throw std::invalid_argument(
            "panel: long format needs a 'time,source,topic,sentiment' header in " + path);

    // topic -> time -> source -> value
    std::map<std::string, std::map<double, std::map<std::string, double>>> cells;
    std::map<std::string, std::set<std::string>> topic_sources;
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("panel: ragged row in " + path);
        const std::string& topic = row[topic_col];
        const std::string& source = row[source_col];
        const double t = parse_double(row[time_col]);
        cells[topic][t][source] = parse_double(row[value_col]);
        topic_sources[topic].insert(source);
    }

    std::vector<OpinionPanel> panels;
    for (auto& [topic, times] : cells) {
        OpinionPanel panel;
        panel.topic = topic;
        panel.sources.assign(topic_sources[topic].begin(), topic_sources[topic].end());
        std::vector<std::vector<double>> rows;
        for (auto& [t, row_cells] : times) {
            if (row_cells.size() != panel.sources.size()) {
                ++panel.dropped_rows;  // listwise deletion of incomplete rows
                continue;
            }
            std::vector<double> row;
            row.reserve(panel.sources.size());
            for (const auto& s : panel.sources) row.push_back(row_cells.at(s));
            panel.times.push_back(t);
            rows.push_back(std::move(row));
        }
        panel.values = rows_to_matrix(rows);
        panels.push_back(std::move(panel));
    }
    return panels;
}

OpinionPanel load_panel_wide(const std::string& path, const std::string& topic) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2 || table.header[0] != "time")
        throw std::invalid_argument("panel: wide format needs a 'time,<source>...' header in " +
                                    path);
    OpinionPanel panel;
    panel.topic = topic;
    panel.sources.assign(table.header.begin() + 1, table.header.end());
    std::vector<std::vector<double>> rows;
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("panel: ragged row in " + path);
        bool complete = true;
        std::vector<double> values;
        values.reserve(panel.sources.size());
        double t = 0.0;
        try {
            t = parse_double(row[0]);
            for (std::size_t c = 1; c < row.size(); ++c) {
                if (row[c].empty()) {
                    complete = false;
                    break;
                }
                values.push_back(parse_double(row[c]));
            }
        } catch (const std::invalid_argument&) {
            complete = false;
        }
        if (!complete) {
            ++panel.dropped_rows;
            continue;
        }
        panel.times.push_back(t);
        rows.push_back(std::move(values));
    }
    panel.values = rows_to_matrix(rows);
    return panel;
}

}  // namespace opdyn

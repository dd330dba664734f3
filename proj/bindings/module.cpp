#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "opdyn/dynamics.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/influence.hpp"
#include "opdyn/spectral.hpp"
#include "opdyn/stats.hpp"
#include "opdyn/trust.hpp"

namespace py = pybind11;
using namespace opdyn;

namespace {

GeneratorConfig config_for(const std::string& variant, py::kwargs kwargs) {
    GeneratorConfig config;
    config.seed = kwargs.contains("seed") ? kwargs["seed"].cast<std::uint64_t>() : 0;
    if (kwargs.contains("self_loops")) config.self_loops = kwargs["self_loops"].cast<bool>();
    if (variant == "er") {
        config.params = ErParams{kwargs["n"].cast<int>(), kwargs["p"].cast<double>()};
    } else if (variant == "ws") {
        config.params = WsParams{kwargs["n"].cast<int>(), kwargs["k"].cast<int>(),
                                 kwargs["q"].cast<double>()};
    } else if (variant == "sbm") {
        config.params = SbmParams{kwargs["sizes"].cast<std::vector<int>>(),
                                  kwargs["p"].cast<std::vector<std::vector<double>>>()};
    } else {
        throw std::invalid_argument("variant must be 'er', 'ws' or 'sbm'");
    }
    return config;
}

NoiseSpec noise_for(const std::string& kind, double sigma2, double beta) {
    if (kind == "none") return NoiseSpec::none();
    if (kind == "iid") return NoiseSpec::iid(sigma2);
    if (kind == "gu") return NoiseSpec::global_uniqueness(sigma2, beta);
    if (kind == "lu") return NoiseSpec::local_uniqueness(sigma2, beta);
    throw std::invalid_argument("noise must be 'none', 'iid', 'gu' or 'lu'");
}

OpinionPanel panel_for(const Eigen::MatrixXd& values, const std::string& topic) {
    OpinionPanel panel;
    panel.topic = topic;
    panel.values = values;
    for (int t = 0; t < values.rows(); ++t) panel.times.push_back(t);
    for (int i = 0; i < values.cols(); ++i) panel.sources.push_back("s" + std::to_string(i));
    return panel;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Noisy opinion dynamics: simulation, spectral diversity predictions, "
              "influence networks";

    py::class_<UndirectedGraph>(m, "Graph")
        .def_property_readonly("n", [](const UndirectedGraph& g) { return g.n; })
        .def_property_readonly("self_loops",
                               [](const UndirectedGraph& g) { return g.self_loops; })
        .def("degree", &UndirectedGraph::degree, py::arg("node"))
        .def("edge_count", &UndirectedGraph::edge_count)
        .def("has_edge", &UndirectedGraph::has_edge, py::arg("i"), py::arg("j"))
        .def("connected", &UndirectedGraph::connected)
        .def(
            "neighbors",
            [](const UndirectedGraph& g, int i) {
                return g.adj.at(static_cast<std::size_t>(i));
            },
            py::arg("node"));

    m.def(
        "generate",
        [](const std::string& variant, bool connected, py::kwargs kwargs) {
            const GeneratorConfig config = config_for(variant, kwargs);
            return connected ? generate_connected(config) : generate(config);
        },
        py::arg("variant"), py::arg("connected") = false,
        "Sample a random graph: generate('er', n=..., p=..., seed=...), "
        "generate('ws', n=..., k=..., q=...), generate('sbm', sizes=[...], p=[[...]])");

    py::class_<NetworkFeatures>(m, "NetworkFeatures")
        .def_readonly("size", &NetworkFeatures::size)
        .def_readonly("avg_degree", &NetworkFeatures::avg_degree)
        .def_readonly("density", &NetworkFeatures::density)
        .def_readonly("avg_clustering", &NetworkFeatures::avg_clustering)
        .def_readonly("connected", &NetworkFeatures::connected)
        .def_property_readonly("avg_shortest_path", [](const NetworkFeatures& f) -> py::object {
            if (f.avg_shortest_path) return py::float_(*f.avg_shortest_path);
            return py::none();
        });
    m.def("features", &features, py::arg("graph"));

    py::class_<TrustMatrix>(m, "TrustMatrix")
        .def_static("from_dense", &TrustMatrix::from_dense, py::arg("matrix"))
        .def_property_readonly("n", &TrustMatrix::size)
        .def_property_readonly("eta", &TrustMatrix::eta)
        .def_property_readonly("directed", &TrustMatrix::directed)
        .def("matrix", &TrustMatrix::matrix, py::return_value_policy::copy)
        .def("row_sums", &TrustMatrix::row_sums)
        .def("max_row_sum", &TrustMatrix::max_row_sum);
    m.def("trust_matrix", &trust_matrix, py::arg("graph"), py::arg("eta") = 0.01,
          "Degree-normalized row-substochastic trust matrix (rows sum to 1/(1+eta))");

    py::class_<Spectrum>(m, "Spectrum")
        .def_static("from_values", &Spectrum::from_values, py::arg("values"))
        .def_readonly("eigenvalues", &Spectrum::eigenvalues)
        .def_readonly("has_complex", &Spectrum::has_complex)
        .def("__len__", &Spectrum::size);
    m.def("spectrum", &spectrum, py::arg("trust_matrix"));

    m.def(
        "diversity_degroot",
        [](const Spectrum& s, double sigma2) { return diversity_degroot(s, sigma2).d; },
        py::arg("spectrum"), py::arg("sigma2") = 1.0,
        "Closed-form stationary opinion diversity, (sigma2/N) * sum 1/(1 - lambda_i^2)");
    m.def(
        "diversity_fj",
        [](const Spectrum& s, double sigma2, double xi2, double susceptibility) {
            return diversity_fj(s, sigma2, xi2, susceptibility).d;
        },
        py::arg("spectrum"), py::arg("sigma2"), py::arg("xi2"), py::arg("susceptibility"));
    m.def(
        "diversity_directed_bound",
        [](const Spectrum& s, double sigma2) { return diversity_directed_bound(s, sigma2).d; },
        py::arg("spectrum"), py::arg("sigma2") = 1.0);
    m.def("marginal_contributions", &marginal_contributions, py::arg("spectrum"));

    py::class_<ModelSpec>(m, "ModelSpec");
    m.def(
        "degroot",
        [](const std::string& noise, double sigma2, double beta) {
            return ModelSpec::degroot(noise_for(noise, sigma2, beta));
        },
        py::arg("noise") = "iid", py::arg("sigma2") = 1.0, py::arg("beta") = 0.0);
    m.def(
        "friedkin_johnsen",
        [](double susceptibility, double xi2, const std::string& noise, double sigma2,
           double beta, std::optional<Eigen::VectorXd> prejudices) {
            if (prejudices)
                return ModelSpec::fj(susceptibility, *prejudices,
                                     noise_for(noise, sigma2, beta));
            return ModelSpec::fj_random(susceptibility, xi2, noise_for(noise, sigma2, beta));
        },
        py::arg("susceptibility"), py::arg("xi2") = 1.0, py::arg("noise") = "iid",
        py::arg("sigma2") = 1.0, py::arg("beta") = 0.0, py::arg("prejudices") = py::none());

    py::class_<ReplicaStats>(m, "ReplicaStats")
        .def_readonly("seed", &ReplicaStats::seed)
        .def_readonly("realized_d", &ReplicaStats::realized_d)
        .def_readonly("msd_zero", &ReplicaStats::msd_zero)
        .def_readonly("mad", &ReplicaStats::mad);

    py::class_<EnsembleResult>(m, "EnsembleResult")
        .def_readonly("replicas", &EnsembleResult::replicas)
        .def_readonly("pooled_terminal", &EnsembleResult::pooled_terminal)
        .def_readonly("predicted_d", &EnsembleResult::predicted_d)
        .def("mean_realized_d", &EnsembleResult::mean_realized_d)
        .def("mean_msd_zero", &EnsembleResult::mean_msd_zero)
        .def("mean_mad", &EnsembleResult::mean_mad);

    m.def(
        "simulate",
        [](const ModelSpec& model, const TrustMatrix& a, int steps, int burn_in,
           std::uint64_t seed) {
            SimulationConfig config;
            config.steps = steps;
            config.burn_in = burn_in;
            config.seed = seed;
            return run(model, a, config).opinions;
        },
        py::arg("model"), py::arg("trust_matrix"), py::arg("steps") = 500,
        py::arg("burn_in") = 100, py::arg("seed") = 0,
        "One trajectory; returns the (steps+1) x N opinion matrix");
    m.def(
        "run_ensemble",
        [](const ModelSpec& model, const TrustMatrix& a, int steps, int burn_in, int replicas,
           std::uint64_t seed, int jobs) {
            SimulationConfig config;
            config.steps = steps;
            config.burn_in = burn_in;
            config.replicas = replicas;
            config.seed = seed;
            return run_ensemble(model, a, config, jobs);
        },
        py::arg("model"), py::arg("trust_matrix"), py::arg("steps") = 500,
        py::arg("burn_in") = 100, py::arg("replicas") = 20, py::arg("seed") = 0,
        py::arg("jobs") = 1);
    m.def("fj_fixed_point", &fj_fixed_point, py::arg("trust_matrix"), py::arg("susceptibility"),
          py::arg("prejudices"));

    m.def("normal_cdf", &normal_cdf, py::arg("x"), py::arg("mean") = 0.0,
          py::arg("variance") = 1.0);
    py::class_<KSResult>(m, "KSResult")
        .def_readonly("d_stat", &KSResult::d_stat)
        .def_readonly("p_value", &KSResult::p_value)
        .def_readonly("n", &KSResult::n);
    m.def(
        "ks_test",
        [](const std::vector<double>& samples, double mean, double variance) {
            return ks_test(samples, mean, variance);
        },
        py::arg("samples"), py::arg("mean") = 0.0, py::arg("variance") = 1.0);
    py::class_<BHOutcome>(m, "BHOutcome")
        .def_readonly("rejected", &BHOutcome::rejected)
        .def_readonly("adjusted_threshold_rank", &BHOutcome::adjusted_threshold_rank)
        .def_readonly("alpha", &BHOutcome::alpha);
    m.def(
        "bh_correct",
        [](const std::vector<double>& p_values, double alpha) {
            return bh_correct(p_values, alpha);
        },
        py::arg("p_values"), py::arg("alpha") = 0.05);
    m.def(
        "dispersion",
        [](const std::vector<double>& samples) {
            const DispersionResult d = dispersion(samples);
            return py::make_tuple(d.msd, d.mad);
        },
        py::arg("samples"), "Returns (mean square deviation, median absolute deviation)");

    m.def(
        "granger_pvalue",
        [](const std::vector<double>& x, const std::vector<double>& y, int max_lag) {
            return granger_pvalue(x, y, max_lag);
        },
        py::arg("x"), py::arg("y"), py::arg("max_lag") = 5);

    py::class_<InfluenceNetwork>(m, "InfluenceNetwork")
        .def_readonly("n", &InfluenceNetwork::n)
        .def_readonly("tested_pairs", &InfluenceNetwork::tested_pairs)
        .def_readonly("degenerate_pairs", &InfluenceNetwork::degenerate_pairs)
        .def_property_readonly("edges", [](const InfluenceNetwork& net) {
            py::list out;
            for (const auto& e : net.edges) out.append(py::make_tuple(e.src, e.dst, e.p_value));
            return out;
        });
    m.def(
        "build_influence_network",
        [](const Eigen::MatrixXd& values, int max_lag, double alpha, int jobs) {
            return build_influence_network(panel_for(values, "panel"),
                                           GrangerConfig{max_lag, alpha}, jobs);
        },
        py::arg("values"), py::arg("max_lag") = 5, py::arg("alpha") = 0.05, py::arg("jobs") = 1,
        "Directed Granger network over the columns of a T x N panel");
    m.def(
        "empirical_diversity",
        [](const Eigen::MatrixXd& values) {
            return empirical_diversity(panel_for(values, "panel"));
        },
        py::arg("values"));

    py::class_<RegressionFit>(m, "RegressionFit")
        .def_readonly("terms", &RegressionFit::terms)
        .def_readonly("coefficients", &RegressionFit::coefficients)
        .def_readonly("standard_errors", &RegressionFit::standard_errors)
        .def_readonly("t_statistics", &RegressionFit::t_statistics)
        .def_readonly("p_values", &RegressionFit::p_values)
        .def_readonly("r_squared", &RegressionFit::r_squared)
        .def_readonly("n_obs", &RegressionFit::n_obs);
    m.def(
        "fit_ols",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) { return fit_ols(x, y); },
        py::arg("design"), py::arg("response"),
        "OLS with standard errors and two-sided t-test p-values; include the "
        "intercept as a design column");

    m.attr("__version__") = "0.1.0";
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "opdyn/dynamics.hpp"
#include "opdyn/graph.hpp"

namespace opdyn {

inline constexpr char kVersion[] = "0.1.0";
inline constexpr int kConfigSchemaVersion = 1;

struct GeneratorSettings {
    std::string variant = "er";  // er | ws | sbm
    int n = 100;
    double p = 0.5;    // er edge probability
    int ws_k = 10;     // ws lattice neighbors (even)
    double ws_q = 0.1; // ws rewiring probability
    std::vector<int> sbm_sizes;              // default: two halves of n
    std::vector<std::vector<double>> sbm_p;  // explicit block matrix, optional
    double sbm_intra = 0.5;                  // intra-group probability pi
    double sbm_avg_degree = 0.0;             // target average degree; 0 -> n/2
    bool connected = true;
    double eta = 0.01;  // trust-matrix slack
};

struct ModelSettings {
    std::string dynamics = "degroot";  // degroot | fj
    std::string noise = "iid";         // none | iid | gu | lu
    double sigma2 = 1.0;
    double beta = 0.0;
    double susceptibility = 1.0;  // fj
    double xi2 = 1.0;             // fj prejudice variance
};

struct SimulationSettings {
    int steps = 500;
    int burn_in = 100;
    int replicas = 20;
    std::string record = "windowed-diversity";  // | terminal-state | full-trajectory
    int pool_snapshots = 1;  // terminal snapshots pooled per replica
    int pool_stride = 50;
    std::optional<double> initial_variance;
};

struct ValidateSettings {
    std::vector<double> connectivities = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    int graphs_per_p = 10;
    double alpha = 0.05;
    /// Rotating nodes sampled per pooled snapshot. Opinions within one
    /// snapshot share the slow consensus coordinate; the KS test assumes
    /// independent draws, so the per-network sample is thinned to a few
    /// nodes per decorrelated snapshot.
    int pool_nodes = 3;
};

struct SweepSettings {
    std::string axis;  // susceptibility | connectivity | clustering | communities | uniqueness
    std::vector<double> values;              // default depends on the axis
    std::vector<double> betas = {0.0, 10.0, 100.0};  // uniqueness only
    int graphs_per_value = 10;
};

struct EmpiricalSettings {
    std::vector<std::string> panels;  // file paths
    std::string panel_dir;            // or a directory of CSV files
    std::string format = "long";      // long | wide
    int max_lag = 5;
    double alpha = 0.05;
    double eta = 0.01;
};

struct ExperimentConfig {
    std::string experiment;  // generate | simulate | diversity | validate-spectral |
                             // sweep | granger | regress
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string scale = "desk";  // desk | paper
    std::string out_dir = "out";
    GeneratorSettings generator;
    ModelSettings model;
    SimulationSettings simulation;
    ValidateSettings validate;
    SweepSettings sweep;
    EmpiricalSettings empirical;
};

struct ConfigOverrides {
    std::optional<std::string> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> jobs;
    std::optional<std::string> scale;
};

/// Resolve a config from JSON text plus command-line overrides. Precedence:
/// scale presets < config file fields < overrides. Unknown keys are errors.
ExperimentConfig resolve_config(const std::string& json_text, const ConfigOverrides& overrides);

ExperimentConfig load_config_file(const std::string& path, const ConfigOverrides& overrides);

/// Canonical JSON for the fully resolved config; hashed into the manifest.
std::string config_to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

GeneratorConfig make_generator(const GeneratorSettings& gen, std::uint64_t seed);
ModelSpec make_model(const ModelSettings& model);
SimulationConfig make_simulation(const SimulationSettings& sim, std::uint64_t seed);

/// Experiment commands. Each validates its config (std::invalid_argument on
/// bad inputs), writes CSV reports plus a manifest.json under cfg.out_dir,
/// and logs one-line progress notes to `log`.
void cmd_generate(const ExperimentConfig& cfg, std::ostream& log);
void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
void cmd_diversity(const ExperimentConfig& cfg, std::ostream& log);
void cmd_validate_spectral(const ExperimentConfig& cfg, std::ostream& log);
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);
void cmd_granger(const ExperimentConfig& cfg, std::ostream& log);
void cmd_regress(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace opdyn

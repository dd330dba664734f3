#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "opdyn/experiments.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> jobs;
    std::optional<std::string> scale;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config file");
    cmd->add_option("--seed", [&flags](const CLI::results_t& res) {
        flags.seed = std::stoull(res[0]);
        return true;
    }, "Master seed (overrides the config)")->expected(1);
    cmd->add_option("--out", [&flags](const CLI::results_t& res) {
        flags.out_dir = res[0];
        return true;
    }, "Output directory")->expected(1);
    cmd->add_option("--jobs", [&flags](const CLI::results_t& res) {
        flags.jobs = std::stoi(res[0]);
        return true;
    }, "Worker threads (outputs are identical for any value)")->expected(1);
    cmd->add_option("--scale", [&flags](const CLI::results_t& res) {
        flags.scale = res[0];
        return true;
    }, "Preset sizes: desk (minutes) or paper (full study, long-running)")->expected(1);
}

opdyn::ExperimentConfig resolve(const CommonFlags& flags, const std::string& experiment) {
    opdyn::ConfigOverrides overrides;
    overrides.experiment = experiment;
    overrides.seed = flags.seed;
    overrides.out_dir = flags.out_dir;
    overrides.jobs = flags.jobs;
    overrides.scale = flags.scale;
    if (!flags.config_path.empty())
        return opdyn::load_config_file(flags.config_path, overrides);
    return opdyn::resolve_config("{}", overrides);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "opdyn: noisy opinion-dynamics simulation, spectral diversity predictions,\n"
        "and Granger-causality influence-network analysis"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string axis;
    std::string variant;
    std::vector<std::string> panel_paths;
    std::string panel_dir, panel_format;
    std::optional<int> max_lag;
    std::optional<double> alpha;

    auto* c_generate = app.add_subcommand("generate", "Sample a random network and export it");
    c_generate->add_option("--variant", variant, "Generator: er, ws or sbm");
    auto* c_simulate = app.add_subcommand("simulate", "Run an opinion-dynamics ensemble");
    auto* c_diversity =
        app.add_subcommand("diversity", "Spectrum and closed-form diversity of a network");
    auto* c_validate = app.add_subcommand(
        "validate-spectral", "Compare simulated opinion distributions with N(0, d)");
    auto* c_sweep = app.add_subcommand("sweep", "Grid experiments over a topology/model axis");
    c_sweep->add_option("--axis", axis,
                        "susceptibility | connectivity | clustering | communities | uniqueness");
    auto* c_granger =
        app.add_subcommand("granger", "Build Granger-causality influence networks from panels");
    auto* c_regress =
        app.add_subcommand("regress", "Full empirical pipeline: networks, features, M1-M3 fits");
    for (auto* cmd : {c_generate, c_simulate, c_diversity, c_validate, c_sweep, c_granger,
                      c_regress})
        add_common(cmd, flags);
    for (auto* cmd : {c_granger, c_regress}) {
        cmd->add_option("--panels", panel_paths, "Panel CSV files");
        cmd->add_option("--panel-dir", panel_dir, "Directory of panel CSV files");
        cmd->add_option("--panel-format", panel_format, "long or wide");
        cmd->add_option("--max-lag", [&max_lag](const CLI::results_t& res) {
            max_lag = std::stoi(res[0]);
            return true;
        }, "Granger lag order")->expected(1);
        cmd->add_option("--alpha", [&alpha](const CLI::results_t& res) {
            alpha = std::stod(res[0]);
            return true;
        }, "FDR level")->expected(1);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // bad usage is a validation error
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        opdyn::ExperimentConfig cfg = resolve(flags, name);
        if (!variant.empty()) cfg.generator.variant = variant;
        if (!axis.empty()) cfg.sweep.axis = axis;
        if (!panel_paths.empty())
            cfg.empirical.panels.insert(cfg.empirical.panels.end(), panel_paths.begin(),
                                        panel_paths.end());
        if (!panel_dir.empty()) cfg.empirical.panel_dir = panel_dir;
        if (!panel_format.empty()) cfg.empirical.format = panel_format;
        if (max_lag) cfg.empirical.max_lag = *max_lag;
        if (alpha) {
            cfg.empirical.alpha = *alpha;
            cfg.validate.alpha = *alpha;
        }

        if (name == "generate")
            opdyn::cmd_generate(cfg, std::cerr);
        else if (name == "simulate")
            opdyn::cmd_simulate(cfg, std::cerr);
        else if (name == "diversity")
            opdyn::cmd_diversity(cfg, std::cerr);
        else if (name == "validate-spectral")
            opdyn::cmd_validate_spectral(cfg, std::cerr);
        else if (name == "sweep")
            opdyn::cmd_sweep(cfg, std::cerr);
        else if (name == "granger")
            opdyn::cmd_granger(cfg, std::cerr);
        else if (name == "regress")
            opdyn::cmd_regress(cfg, std::cerr);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

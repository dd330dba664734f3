#include "opdyn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <stdexcept>

#include "opdyn/csv.hpp"
#include "opdyn/influence.hpp"
#include "opdyn/parallel.hpp"
#include "opdyn/spectral.hpp"
#include "opdyn/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace opdyn {

namespace {

// ---------------------------------------------------------------------------
// config parsing

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

void parse_generator(const json& j, GeneratorSettings& g) {
    check_keys(j, {"variant", "n", "p", "ws_k", "ws_q", "sbm_sizes", "sbm_p", "sbm_intra",
                   "sbm_avg_degree", "connected", "eta"},
               "generator");
    g.variant = j.value("variant", g.variant);
    g.n = j.value("n", g.n);
    g.p = j.value("p", g.p);
    g.ws_k = j.value("ws_k", g.ws_k);
    g.ws_q = j.value("ws_q", g.ws_q);
    if (j.contains("sbm_sizes")) g.sbm_sizes = j["sbm_sizes"].get<std::vector<int>>();
    if (j.contains("sbm_p")) g.sbm_p = j["sbm_p"].get<std::vector<std::vector<double>>>();
    g.sbm_intra = j.value("sbm_intra", g.sbm_intra);
    g.sbm_avg_degree = j.value("sbm_avg_degree", g.sbm_avg_degree);
    g.connected = j.value("connected", g.connected);
    g.eta = j.value("eta", g.eta);
}

void parse_model(const json& j, ModelSettings& m) {
    check_keys(j, {"dynamics", "noise", "sigma2", "beta", "susceptibility", "xi2"}, "model");
    m.dynamics = j.value("dynamics", m.dynamics);
    m.noise = j.value("noise", m.noise);
    m.sigma2 = j.value("sigma2", m.sigma2);
    m.beta = j.value("beta", m.beta);
    m.susceptibility = j.value("susceptibility", m.susceptibility);
    m.xi2 = j.value("xi2", m.xi2);
}

void parse_simulation(const json& j, SimulationSettings& s) {
    check_keys(j, {"steps", "burn_in", "replicas", "record", "pool_snapshots", "pool_stride",
                   "initial_variance"},
               "simulation");
    s.steps = j.value("steps", s.steps);
    s.burn_in = j.value("burn_in", s.burn_in);
    s.replicas = j.value("replicas", s.replicas);
    s.record = j.value("record", s.record);
    s.pool_snapshots = j.value("pool_snapshots", s.pool_snapshots);
    s.pool_stride = j.value("pool_stride", s.pool_stride);
    if (j.contains("initial_variance")) s.initial_variance = j["initial_variance"].get<double>();
}

void parse_validate(const json& j, ValidateSettings& v) {
    check_keys(j, {"connectivities", "graphs_per_p", "alpha", "pool_nodes"}, "validate");
    if (j.contains("connectivities"))
        v.connectivities = j["connectivities"].get<std::vector<double>>();
    v.graphs_per_p = j.value("graphs_per_p", v.graphs_per_p);
    v.alpha = j.value("alpha", v.alpha);
    v.pool_nodes = j.value("pool_nodes", v.pool_nodes);
}

void parse_sweep(const json& j, SweepSettings& s) {
    check_keys(j, {"axis", "values", "betas", "graphs_per_value"}, "sweep");
    s.axis = j.value("axis", s.axis);
    if (j.contains("values")) s.values = j["values"].get<std::vector<double>>();
    if (j.contains("betas")) s.betas = j["betas"].get<std::vector<double>>();
    s.graphs_per_value = j.value("graphs_per_value", s.graphs_per_value);
}

void parse_empirical(const json& j, EmpiricalSettings& e) {
    check_keys(j, {"panels", "panel_dir", "format", "max_lag", "alpha", "eta"}, "empirical");
    if (j.contains("panels")) e.panels = j["panels"].get<std::vector<std::string>>();
    e.panel_dir = j.value("panel_dir", e.panel_dir);
    e.format = j.value("format", e.format);
    e.max_lag = j.value("max_lag", e.max_lag);
    e.alpha = j.value("alpha", e.alpha);
    e.eta = j.value("eta", e.eta);
}

void apply_experiment_presets(ExperimentConfig& cfg) {
    if (cfg.experiment != "validate-spectral") return;
    // Long runs with widely spaced snapshots so that the thinned per-network
    // sample is effectively i.i.d. while keeping KS power against N(0, s2).
    cfg.simulation.steps = 5000;
    cfg.simulation.burn_in = 4900;
    cfg.simulation.pool_snapshots = 36;
    cfg.simulation.pool_stride = 125;
}

void apply_scale_presets(ExperimentConfig& cfg) {
    if (cfg.scale == "desk") return;  // struct defaults are the desk presets
    if (cfg.scale != "paper")
        throw std::invalid_argument("config: scale must be 'desk' or 'paper'");
    // Full study counts; slow, flagged as such by the CLI help.
    cfg.validate.graphs_per_p = 100;
    cfg.sweep.graphs_per_value = 100;
    cfg.simulation.replicas = 100;
}

}  // namespace

ExperimentConfig resolve_config(const std::string& json_text, const ConfigOverrides& overrides) {
    json j;
    try {
        j = json::parse(json_text.empty() ? "{}" : json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    check_keys(j,
               {"schema_version", "experiment", "seed", "jobs", "scale", "out_dir", "generator",
                "model", "simulation", "validate", "sweep", "empirical"},
               "the top level");
    if (j.contains("schema_version") && j["schema_version"].get<int>() != kConfigSchemaVersion)
        throw std::invalid_argument("config: unsupported schema_version");

    ExperimentConfig cfg;
    cfg.experiment = overrides.experiment.value_or(j.value("experiment", cfg.experiment));
    cfg.scale = overrides.scale.value_or(j.value("scale", cfg.scale));
    apply_experiment_presets(cfg);
    apply_scale_presets(cfg);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("generator")) parse_generator(j["generator"], cfg.generator);
    if (j.contains("model")) parse_model(j["model"], cfg.model);
    if (j.contains("simulation")) parse_simulation(j["simulation"], cfg.simulation);
    if (j.contains("validate")) parse_validate(j["validate"], cfg.validate);
    if (j.contains("sweep")) parse_sweep(j["sweep"], cfg.sweep);
    if (j.contains("empirical")) parse_empirical(j["empirical"], cfg.empirical);

    if (overrides.experiment) cfg.experiment = *overrides.experiment;
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
    if (overrides.jobs) cfg.jobs = *overrides.jobs;
    if (cfg.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path, const ConfigOverrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return resolve_config(text, overrides);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["experiment"] = cfg.experiment;
    j["seed"] = cfg.seed;
    j["jobs"] = cfg.jobs;
    j["scale"] = cfg.scale;
    j["out_dir"] = cfg.out_dir;
    j["generator"] = {{"variant", cfg.generator.variant},
                      {"n", cfg.generator.n},
                      {"p", cfg.generator.p},
                      {"ws_k", cfg.generator.ws_k},
                      {"ws_q", cfg.generator.ws_q},
                      {"sbm_sizes", cfg.generator.sbm_sizes},
                      {"sbm_p", cfg.generator.sbm_p},
                      {"sbm_intra", cfg.generator.sbm_intra},
                      {"sbm_avg_degree", cfg.generator.sbm_avg_degree},
                      {"connected", cfg.generator.connected},
                      {"eta", cfg.generator.eta}};
    j["model"] = {{"dynamics", cfg.model.dynamics},   {"noise", cfg.model.noise},
                  {"sigma2", cfg.model.sigma2},       {"beta", cfg.model.beta},
                  {"susceptibility", cfg.model.susceptibility}, {"xi2", cfg.model.xi2}};
    j["simulation"] = {{"steps", cfg.simulation.steps},
                       {"burn_in", cfg.simulation.burn_in},
                       {"replicas", cfg.simulation.replicas},
                       {"record", cfg.simulation.record},
                       {"pool_snapshots", cfg.simulation.pool_snapshots},
                       {"pool_stride", cfg.simulation.pool_stride}};
    if (cfg.simulation.initial_variance)
        j["simulation"]["initial_variance"] = *cfg.simulation.initial_variance;
    j["validate"] = {{"connectivities", cfg.validate.connectivities},
                     {"graphs_per_p", cfg.validate.graphs_per_p},
                     {"alpha", cfg.validate.alpha},
                     {"pool_nodes", cfg.validate.pool_nodes}};
    j["sweep"] = {{"axis", cfg.sweep.axis},
                  {"values", cfg.sweep.values},
                  {"betas", cfg.sweep.betas},
                  {"graphs_per_value", cfg.sweep.graphs_per_value}};
    j["empirical"] = {{"panels", cfg.empirical.panels}, {"panel_dir", cfg.empirical.panel_dir},
                      {"format", cfg.empirical.format}, {"max_lag", cfg.empirical.max_lag},
                      {"alpha", cfg.empirical.alpha},   {"eta", cfg.empirical.eta}};
    return j.dump(2);
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_to_json(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xF];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

GeneratorConfig make_generator(const GeneratorSettings& gen, std::uint64_t seed) {
    GeneratorConfig config;
    config.seed = seed;
    config.self_loops = true;
    if (gen.variant == "er") {
        config.params = ErParams{gen.n, gen.p};
    } else if (gen.variant == "ws") {
        config.params = WsParams{gen.n, gen.ws_k, gen.ws_q};
    } else if (gen.variant == "sbm") {
        SbmParams sbm;
        if (!gen.sbm_sizes.empty()) {
            sbm.sizes = gen.sbm_sizes;
        } else {
            sbm.sizes = {gen.n / 2, gen.n - gen.n / 2};
        }
        if (!gen.sbm_p.empty()) {
            sbm.p = gen.sbm_p;
        } else {
            const double n = static_cast<double>(gen.n);
            const double k = gen.sbm_avg_degree > 0.0 ? gen.sbm_avg_degree : n / 2.0;
            const double inter = 2.0 * k / n - gen.sbm_intra;
            if (!(inter >= 0.0 && inter <= 1.0))
                throw std::invalid_argument(
                    "generator: sbm_intra incompatible with the target average degree");
            sbm.p = {{gen.sbm_intra, inter}, {inter, gen.sbm_intra}};
        }
        config.params = sbm;
    } else {
        throw std::invalid_argument("generator: variant must be er, ws or sbm");
    }
    return config;
}

ModelSpec make_model(const ModelSettings& model) {
    NoiseSpec noise;
    if (model.noise == "none")
        noise = NoiseSpec::none();
    else if (model.noise == "iid")
        noise = NoiseSpec::iid(model.sigma2);
    else if (model.noise == "gu")
        noise = NoiseSpec::global_uniqueness(model.sigma2, model.beta);
    else if (model.noise == "lu")
        noise = NoiseSpec::local_uniqueness(model.sigma2, model.beta);
    else
        throw std::invalid_argument("model: noise must be none, iid, gu or lu");

    if (model.dynamics == "degroot") return ModelSpec::degroot(noise);
    if (model.dynamics == "fj")
        return ModelSpec::fj_random(model.susceptibility, model.xi2, noise);
    throw std::invalid_argument("model: dynamics must be degroot or fj");
}

SimulationConfig make_simulation(const SimulationSettings& sim, std::uint64_t seed) {
    SimulationConfig config;
    config.steps = sim.steps;
    config.burn_in = sim.burn_in;
    config.replicas = sim.replicas;
    config.seed = seed;
    config.pool_snapshots = sim.pool_snapshots;
    config.pool_stride = sim.pool_stride;
    config.initial_variance = sim.initial_variance;
    if (sim.record == "full-trajectory")
        config.record = SimulationConfig::Record::FullTrajectory;
    else if (sim.record == "terminal-state")
        config.record = SimulationConfig::Record::TerminalState;
    else if (sim.record == "windowed-diversity")
        config.record = SimulationConfig::Record::WindowedDiversity;
    else
        throw std::invalid_argument("simulation: unknown record mode '" + sim.record + "'");
    return config;
}

namespace {

// ---------------------------------------------------------------------------
// report plumbing

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
    return dir;
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& dir) {
    json manifest;
    manifest["tool"] = "opdyn";
    manifest["version"] = kVersion;
    manifest["command"] = cfg.experiment;
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = config_hash(cfg);
    manifest["config"] = json::parse(config_to_json(cfg));
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << manifest.dump(2) << '\n';
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return format_u64(v); }
std::string fmt(int v) { return std::to_string(v); }

UndirectedGraph make_graph(const GeneratorSettings& gen, std::uint64_t seed) {
    const GeneratorConfig config = make_generator(gen, seed);
    return gen.connected ? generate_connected(config) : generate(config);
}

struct EnsembleRun {
    std::uint64_t graph_seed = 0;
    std::uint64_t run_seed = 0;
    EnsembleResult result;
};

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// ---------------------------------------------------------------------------
// panel loading shared by granger/regress

std::vector<OpinionPanel> load_panels(const EmpiricalSettings& emp, std::ostream& log) {
    std::vector<std::string> paths = emp.panels;
    if (!emp.panel_dir.empty()) {
        if (!fs::is_directory(emp.panel_dir))
            throw std::invalid_argument("empirical: panel_dir is not a directory: " +
                                        emp.panel_dir);
        std::vector<std::string> found;
        for (const auto& entry : fs::directory_iterator(emp.panel_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".csv")
                found.push_back(entry.path().string());
        std::sort(found.begin(), found.end());
        paths.insert(paths.end(), found.begin(), found.end());
    }
    if (paths.empty()) throw std::invalid_argument("empirical: no input panels");

    std::vector<OpinionPanel> panels;
    for (const auto& path : paths) {
        if (emp.format == "long") {
            auto loaded = load_panels_long(path);
            for (auto& p : loaded) panels.push_back(std::move(p));
        } else if (emp.format == "wide") {
            panels.push_back(load_panel_wide(path, fs::path(path).stem().string()));
        } else {
            throw std::invalid_argument("empirical: format must be 'long' or 'wide'");
        }
    }
    std::size_t dropped = 0;
    for (const auto& p : panels) dropped += p.dropped_rows;
    if (dropped > 0) log << "panels: dropped " << dropped << " incomplete time rows\n";
    return panels;
}

}  // namespace

// ---------------------------------------------------------------------------
// commands

void cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out_dir(cfg);
    const std::uint64_t graph_seed = derive_seed(cfg.seed, 1);
    const UndirectedGraph g = make_graph(cfg.generator, graph_seed);
    const TrustMatrix a = trust_matrix(g, cfg.generator.eta);
    const NetworkFeatures f = features(g);

    {
        CsvWriter edges(dir / "graph.csv", {"src", "dst", "weight"});
        for (int i = 0; i < g.n; ++i) {
            if (g.self_loops) edges.row({fmt(i), fmt(i), "1"});
            for (int j : g.adj[i])
                if (j > i) edges.row({fmt(i), fmt(j), "1"});
        }
    }
    {
        std::vector<std::string> header(g.n);
        for (int j = 0; j < g.n; ++j) header[j] = "c" + std::to_string(j);
        CsvWriter trust(dir / "trust.csv", header);
        std::vector<std::string> row(g.n);
        for (int i = 0; i < g.n; ++i) {
            for (int j = 0; j < g.n; ++j) row[j] = fmt(a.matrix()(i, j));
            trust.row(row);
        }
    }
    {
        CsvWriter feats(dir / "features.csv",
                        {"n", "avg_degree", "density", "avg_clustering", "avg_shortest_path",
                         "connected"});
        feats.row({fmt(f.size), fmt(f.avg_degree), fmt(f.density), fmt(f.avg_clustering),
                   f.avg_shortest_path ? fmt(*f.avg_shortest_path) : "",
                   f.connected ? "1" : "0"});
    }
    write_manifest(cfg, dir);
    log << "generate: n=" << g.n << " edges=" << g.edge_count() << " -> " << dir.string() << "\n";
}

void cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out_dir(cfg);
    const std::uint64_t graph_seed = derive_seed(cfg.seed, 1);
    const std::uint64_t run_seed = derive_seed(cfg.seed, 2);
    const UndirectedGraph g = make_graph(cfg.generator, graph_seed);
    const TrustMatrix a = trust_matrix(g, cfg.generator.eta);
    const ModelSpec model = make_model(cfg.model);
    const SimulationConfig sim = make_simulation(cfg.simulation, run_seed);

    const EnsembleResult ensemble = run_ensemble(model, a, sim, cfg.jobs);
    {
        CsvWriter out(dir / "ensemble.csv", {"replica", "realized_d", "mad", "predicted_d",
                                             "seed"});
        for (std::size_t r = 0; r < ensemble.replicas.size(); ++r) {
            const auto& rep = ensemble.replicas[r];
            out.row({fmt(static_cast<int>(r)), fmt(rep.realized_d), fmt(rep.mad),
                     fmt(ensemble.predicted_d), fmt(rep.seed)});
        }
    }
    if (sim.record == SimulationConfig::Record::FullTrajectory) {
        // Full record of the first replica (its seed equals ensemble row 0).
        SimulationConfig single = sim;
        single.seed = derive_seed(run_seed, 0);
        single.replicas = 1;
        const Trajectory traj = run(model, a, single);
        CsvWriter out(dir / "trajectory.csv", {"t", "node", "opinion"});
        for (int t = 0; t < traj.opinions.rows(); ++t)
            for (int i = 0; i < traj.opinions.cols(); ++i)
                out.row({fmt(t), fmt(i), fmt(traj.opinions(t, i))});
    }
    write_manifest(cfg, dir);
    log << "simulate: " << ensemble.replicas.size() << " replicas, mean realized d = "
        << ensemble.mean_realized_d() << " (predicted " << ensemble.predicted_d << ")\n";
}

void cmd_diversity(const ExperimentConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out_dir(cfg);
    const std::uint64_t graph_seed = derive_seed(cfg.seed, 1);
    const UndirectedGraph g = make_graph(cfg.generator, graph_seed);
    const TrustMatrix a = trust_matrix(g, cfg.generator.eta);
    const Spectrum s = spectrum(a);

    {
        CsvWriter out(dir / "spectrum.csv", {"eigenvalue"});
        for (double ev : s.eigenvalues) out.row({fmt(ev)});
    }
    {
        const auto contributions = marginal_contributions(s);
        CsvWriter out(dir / "marginals.csv", {"eigenvalue", "contribution"});
        for (std::size_t i = 0; i < contributions.size(); ++i)
            out.row({fmt(s.eigenvalues[i]), fmt(contributions[i])});
    }
    {
        CsvWriter out(dir / "diversity.csv", {"quantity", "value", "kind"});
        const auto deg = diversity_degroot(s, cfg.model.sigma2);
        out.row({"d_degroot", fmt(deg.d), "exact-undirected"});
        const auto fj =
            diversity_fj(s, cfg.model.sigma2, cfg.model.xi2, cfg.model.susceptibility);
        out.row({"d_fj", fmt(fj.d), "exact-undirected"});
        const auto bound = diversity_directed_bound(s, cfg.model.sigma2);
        out.row({"d_directed_bound", fmt(bound.d), "upper-bound-directed"});
    }
    write_manifest(cfg, dir);
    log << "diversity: n=" << g.n << " lambda_1=" << s.eigenvalues.front() << "\n";
}

void cmd_validate_spectral(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.generator.variant != "er")
        throw std::invalid_argument("validate-spectral: generator must be er");
    if (!(cfg.model.sigma2 > 0.0))
        throw std::invalid_argument(
            "validate-spectral: sigma2 must be > 0 (the reference distribution is degenerate)");
    if (cfg.model.dynamics != "degroot" || cfg.model.noise != "iid")
        throw std::invalid_argument("validate-spectral: model must be degroot with iid noise");
    if (cfg.validate.connectivities.empty())
        throw std::invalid_argument("validate-spectral: needs a list of connectivities");

    const fs::path dir = prepare_out_dir(cfg);
    const std::uint64_t graphs_master = derive_seed(cfg.seed, 1);
    const std::uint64_t runs_master = derive_seed(cfg.seed, 2);
    const ModelSpec model = make_model(cfg.model);

    SimulationSettings sim = cfg.simulation;
    const int max_snapshots = (sim.steps - 1) / sim.pool_stride + 1;
    if (sim.pool_snapshots > max_snapshots) {
        sim.pool_snapshots = max_snapshots;
        log << "validate-spectral: pool window clamped to " << max_snapshots
            << " snapshots to fit " << sim.steps << " steps\n";
    }

    const auto& ps = cfg.validate.connectivities;
    const int graphs = cfg.validate.graphs_per_p;
    const std::size_t units = ps.size() * static_cast<std::size_t>(graphs);

    struct Unit {
        std::uint64_t graph_seed, run_seed;
        double predicted_d = 0.0;
        double ks_p_sigma2 = 1.0, ks_p_d = 1.0;
        EnsembleResult ensemble;
    };
    std::vector<Unit> grid(units);

    parallel_for(units, cfg.jobs, [&](std::size_t u) {
        const std::size_t p_idx = u / graphs;
        GeneratorSettings gen = cfg.generator;
        gen.p = ps[p_idx];
        Unit& unit = grid[u];
        unit.graph_seed = derive_seed(graphs_master, u);
        unit.run_seed = derive_seed(runs_master, u);
        const UndirectedGraph g = make_graph(gen, unit.graph_seed);
        const TrustMatrix a = trust_matrix(g, gen.eta);
        unit.ensemble = run_ensemble(model, a, make_simulation(sim, unit.run_seed));
        unit.predicted_d = unit.ensemble.predicted_d;
        const std::vector<double> sample =
            thin_pooled_sample(unit.ensemble, g.n, std::min(cfg.validate.pool_nodes, g.n));
        unit.ks_p_sigma2 = ks_test(sample, 0.0, cfg.model.sigma2).p_value;
        unit.ks_p_d = ks_test(sample, 0.0, unit.predicted_d).p_value;
    });

    // One BH family per reference distribution.
    std::vector<double> p_sigma2(units), p_d(units);
    for (std::size_t u = 0; u < units; ++u) {
        p_sigma2[u] = grid[u].ks_p_sigma2;
        p_d[u] = grid[u].ks_p_d;
    }
    const BHOutcome bh_sigma2 = bh_correct(p_sigma2, cfg.validate.alpha);
    const BHOutcome bh_d = bh_correct(p_d, cfg.validate.alpha);

    {
        CsvWriter out(dir / "networks.csv",
                      {"p", "graph_id", "graph_seed", "run_seed", "predicted_d",
                       "mean_realized_d", "mean_realized_msd0", "mean_mad", "ks_p_sigma2",
                       "ks_p_d", "bh_reject_sigma2", "bh_reject_d"});
        for (std::size_t u = 0; u < units; ++u) {
            const Unit& unit = grid[u];
            out.row({fmt(ps[u / graphs]), fmt(static_cast<int>(u % graphs)),
                     fmt(unit.graph_seed), fmt(unit.run_seed), fmt(unit.predicted_d),
                     fmt(unit.ensemble.mean_realized_d()), fmt(unit.ensemble.mean_msd_zero()),
                     fmt(unit.ensemble.mean_mad()), fmt(unit.ks_p_sigma2), fmt(unit.ks_p_d),
                     bh_sigma2.rejected[u] ? "1" : "0", bh_d.rejected[u] ? "1" : "0"});
        }
    }
    {
        CsvWriter out(dir / "replicas.csv", {"p", "graph_id", "replica", "replica_seed",
                                             "realized_d", "realized_msd0", "mad"});
        for (std::size_t u = 0; u < units; ++u)
            for (std::size_t r = 0; r < grid[u].ensemble.replicas.size(); ++r) {
                const auto& rep = grid[u].ensemble.replicas[r];
                out.row({fmt(ps[u / graphs]), fmt(static_cast<int>(u % graphs)),
                         fmt(static_cast<int>(r)), fmt(rep.seed), fmt(rep.realized_d),
                         fmt(rep.msd_zero), fmt(rep.mad)});
            }
    }
    {
        CsvWriter out(dir / "summary.csv",
                      {"p", "n_networks", "reject_rate_sigma2", "reject_rate_d"});
        std::size_t total_s = 0, total_d = 0;
        for (std::size_t p_idx = 0; p_idx < ps.size(); ++p_idx) {
            std::size_t rs = 0, rd = 0;
            for (int g = 0; g < graphs; ++g) {
                const std::size_t u = p_idx * graphs + g;
                rs += bh_sigma2.rejected[u] ? 1 : 0;
                rd += bh_d.rejected[u] ? 1 : 0;
            }
            total_s += rs;
            total_d += rd;
            out.row({fmt(ps[p_idx]), fmt(graphs), fmt(static_cast<double>(rs) / graphs),
                     fmt(static_cast<double>(rd) / graphs)});
        }
        out.row({"total", fmt(static_cast<int>(units)),
                 fmt(static_cast<double>(total_s) / static_cast<double>(units)),
                 fmt(static_cast<double>(total_d) / static_cast<double>(units))});
    }
    write_manifest(cfg, dir);
    log << "validate-spectral: " << units << " networks -> " << dir.string() << "\n";
}

namespace {

struct SweepCell {
    double value = 0.0;
    double beta = std::numeric_limits<double>::quiet_NaN();  // uniqueness only
    std::string model_name;
    std::size_t graph_index = 0;  // index into the graph seed space
    ModelSpec model;
    GeneratorSettings generator;
};

}  // namespace

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
    SweepSettings sweep = cfg.sweep;
    if (sweep.axis.empty()) throw std::invalid_argument("sweep: axis is required");
    if (sweep.graphs_per_value < 1)
        throw std::invalid_argument("sweep: graphs_per_value must be >= 1");

    // Per-axis default grids.
    if (sweep.values.empty()) {
        if (sweep.axis == "susceptibility")
            sweep.values = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
        else if (sweep.axis == "connectivity" || sweep.axis == "uniqueness")
            sweep.values = sweep.axis == "connectivity"
                               ? std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}
                               : std::vector<double>{0.1, 0.5, 0.9};
        else if (sweep.axis == "clustering")
            sweep.values = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
        else if (sweep.axis == "communities") {
            for (int i = 0; i < 11; ++i) sweep.values.push_back(0.05 + 0.09 * i);
        } else {
            throw std::invalid_argument("sweep: unknown axis '" + sweep.axis + "'");
        }
    }

    const fs::path dir = prepare_out_dir(cfg);
    const std::uint64_t graphs_master = derive_seed(cfg.seed, 1);
    const std::uint64_t runs_master = derive_seed(cfg.seed, 2);
    const int graphs = sweep.graphs_per_value;

    // Build the cell list. graph_index keys the graph seed so that axes which
    // reuse graphs across cells (susceptibility; uniqueness across beta and
    // model) get identical samples there.
    std::vector<SweepCell> cells;
    const ModelSpec base_model = make_model(cfg.model);
    if (sweep.axis == "susceptibility") {
        if (cfg.model.dynamics != "fj")
            throw std::invalid_argument("sweep: susceptibility axis requires the fj model");
        for (std::size_t v = 0; v < sweep.values.size(); ++v) {
            const double s = sweep.values[v];
            if (!(s >= 0.0 && s <= 1.0))
                throw std::invalid_argument("sweep: susceptibility values must lie in [0, 1]");
            for (int g = 0; g < graphs; ++g) {
                SweepCell cell;
                cell.value = s;
                cell.model_name = "fj";
                cell.generator = cfg.generator;
                cell.graph_index = g;  // same graphs across s
                cell.model = base_model;
                cell.model.susceptibility = s;
                cells.push_back(std::move(cell));
            }
        }
    } else if (sweep.axis == "connectivity") {
        for (std::size_t v = 0; v < sweep.values.size(); ++v)
            for (int g = 0; g < graphs; ++g) {
                SweepCell cell;
                cell.value = sweep.values[v];
                cell.model_name = cfg.model.dynamics;
                cell.generator = cfg.generator;
                cell.generator.variant = "er";
                cell.generator.p = sweep.values[v];
                cell.graph_index = v * graphs + g;
                cell.model = base_model;
                cells.push_back(std::move(cell));
            }
    } else if (sweep.axis == "clustering") {
        for (std::size_t v = 0; v < sweep.values.size(); ++v)
            for (int g = 0; g < graphs; ++g) {
                SweepCell cell;
                cell.value = sweep.values[v];
                cell.model_name = cfg.model.dynamics;
                cell.generator = cfg.generator;
                cell.generator.variant = "ws";
                cell.generator.ws_q = sweep.values[v];
                cell.graph_index = v * graphs + g;
                cell.model = base_model;
                cells.push_back(std::move(cell));
            }
    } else if (sweep.axis == "communities") {
        for (std::size_t v = 0; v < sweep.values.size(); ++v)
            for (int g = 0; g < graphs; ++g) {
                SweepCell cell;
                cell.value = sweep.values[v];
                cell.model_name = cfg.model.dynamics;
                cell.generator = cfg.generator;
                cell.generator.variant = "sbm";
                cell.generator.sbm_intra = sweep.values[v];
                cell.graph_index = v * graphs + g;
                cell.model = base_model;
                cells.push_back(std::move(cell));
            }
    } else if (sweep.axis == "uniqueness") {
        if (sweep.betas.empty()) throw std::invalid_argument("sweep: uniqueness needs betas");
        for (std::size_t v = 0; v < sweep.values.size(); ++v)
            for (double beta : sweep.betas)
                for (const char* noise : {"gu", "lu"})
                    for (int g = 0; g < graphs; ++g) {
                        SweepCell cell;
                        cell.value = sweep.values[v];
                        cell.beta = beta;
                        cell.model_name = noise;
                        cell.generator = cfg.generator;
                        cell.generator.variant = "er";
                        cell.generator.p = sweep.values[v];
                        cell.graph_index = v * graphs + g;  // shared across beta and model
                        ModelSettings ms = cfg.model;
                        ms.dynamics = "degroot";
                        ms.noise = noise;
                        ms.beta = beta;
                        cell.model = make_model(ms);
                        cells.push_back(std::move(cell));
                    }
    }

    std::vector<EnsembleRun> runs(cells.size());
    parallel_for(cells.size(), cfg.jobs, [&](std::size_t c) {
        const SweepCell& cell = cells[c];
        EnsembleRun& out = runs[c];
        out.graph_seed = derive_seed(graphs_master, cell.graph_index);
        out.run_seed = derive_seed(runs_master, cell.graph_index);
        const UndirectedGraph g = make_graph(cell.generator, out.graph_seed);
        const TrustMatrix a = trust_matrix(g, cell.generator.eta);
        out.result = run_ensemble(cell.model, a, make_simulation(cfg.simulation, out.run_seed));
    });

    {
        CsvWriter out(dir / "rows.csv",
                      {"axis", "value", "beta", "model", "graph_id", "graph_seed", "replica",
                       "replica_seed", "predicted_d", "realized_d", "realized_msd0", "mad"});
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const SweepCell& cell = cells[c];
            const EnsembleRun& er = runs[c];
            const std::string beta_txt = std::isnan(cell.beta) ? "" : fmt(cell.beta);
            for (std::size_t r = 0; r < er.result.replicas.size(); ++r) {
                const auto& rep = er.result.replicas[r];
                out.row({sweep.axis, fmt(cell.value), beta_txt, cell.model_name,
                         fmt(static_cast<int>(cell.graph_index)), fmt(er.graph_seed),
                         fmt(static_cast<int>(r)), fmt(rep.seed), fmt(er.result.predicted_d),
                         fmt(rep.realized_d), fmt(rep.msd_zero), fmt(rep.mad)});
            }
        }
    }
    {
        CsvWriter out(dir / "summary.csv",
                      {"axis", "value", "beta", "model", "n_graphs", "mean_predicted_d",
                       "mean_realized_d", "mean_realized_msd0", "mean_mad"});
        // Group by (value, beta, model) preserving cell order.
        std::vector<std::string> seen;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const SweepCell& cell = cells[c];
            const std::string key = fmt(cell.value) + "|" +
                                    (std::isnan(cell.beta) ? "" : fmt(cell.beta)) + "|" +
                                    cell.model_name;
            if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
            seen.push_back(key);
            std::vector<double> pred, realized, msd0, mad;
            for (std::size_t c2 = 0; c2 < cells.size(); ++c2) {
                const SweepCell& other = cells[c2];
                const std::string key2 = fmt(other.value) + "|" +
                                         (std::isnan(other.beta) ? "" : fmt(other.beta)) + "|" +
                                         other.model_name;
                if (key2 != key) continue;
                pred.push_back(runs[c2].result.predicted_d);
                realized.push_back(runs[c2].result.mean_realized_d());
                msd0.push_back(runs[c2].result.mean_msd_zero());
                mad.push_back(runs[c2].result.mean_mad());
            }
            out.row({sweep.axis, fmt(cell.value),
                     std::isnan(cell.beta) ? "" : fmt(cell.beta), cell.model_name,
                     fmt(static_cast<int>(pred.size())), fmt(mean_of(pred)),
                     fmt(mean_of(realized)), fmt(mean_of(msd0)), fmt(mean_of(mad))});
        }
    }
    write_manifest(cfg, dir);
    log << "sweep(" << sweep.axis << "): " << cells.size() << " cells -> " << dir.string()
        << "\n";
}

void cmd_granger(const ExperimentConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out_dir(cfg);
    const auto panels = load_panels(cfg.empirical, log);
    const GrangerConfig gcfg{cfg.empirical.max_lag, cfg.empirical.alpha};

    CsvWriter edges(dir / "networks.csv", {"topic", "src", "dst", "pvalue"});
    CsvWriter topics(dir / "topics.csv",
                     {"topic", "n_sources", "n_times", "dropped_rows", "n_edges",
                      "degenerate_pairs"});
    for (const auto& panel : panels) {
        if (panel.sources.size() < 2) {
            log << "granger: topic '" << panel.topic << "' has fewer than 2 sources, skipped\n";
            topics.row({panel.topic, fmt(static_cast<int>(panel.sources.size())),
                        fmt(static_cast<int>(panel.values.rows())), fmt(panel.dropped_rows),
                        "0", "0"});
            continue;
        }
        const InfluenceNetwork net = build_influence_network(panel, gcfg, cfg.jobs);
        for (const auto& e : net.edges)
            edges.row({panel.topic, panel.sources[e.src], panel.sources[e.dst],
                       fmt(e.p_value)});
        topics.row({panel.topic, fmt(net.n), fmt(static_cast<int>(panel.values.rows())),
                    fmt(panel.dropped_rows), fmt(static_cast<int>(net.edges.size())),
                    fmt(static_cast<int>(net.degenerate_pairs))});
    }
    write_manifest(cfg, dir);
    log << "granger: " << panels.size() << " topics -> " << dir.string() << "\n";
}

void cmd_regress(const ExperimentConfig& cfg, std::ostream& log) {
    const fs::path dir = prepare_out_dir(cfg);
    const auto panels = load_panels(cfg.empirical, log);
    const GrangerConfig gcfg{cfg.empirical.max_lag, cfg.empirical.alpha};

    std::vector<RegressionObservation> observations;
    CsvWriter topics(dir / "topics.csv",
                     {"topic", "n_sources", "y_k", "predicted_d", "directed_bound", "L", "N",
                      "C", "D", "connected", "n_edges"});
    for (const auto& panel : panels) {
        if (panel.sources.size() < 2) {
            log << "regress: topic '" << panel.topic << "' has fewer than 2 sources, skipped\n";
            continue;
        }
        const TopicAnalysis t = analyze_topic(panel, gcfg, cfg.empirical.eta, cfg.jobs);
        topics.row({t.topic, fmt(t.network.n), fmt(t.realized_diversity), fmt(t.predicted_d),
                    fmt(t.directed_bound),
                    t.features.avg_shortest_path ? fmt(*t.features.avg_shortest_path) : "",
                    fmt(t.features.size), fmt(t.features.avg_clustering),
                    fmt(t.features.density), t.features.connected ? "1" : "0",
                    fmt(static_cast<int>(t.network.edges.size()))});
        RegressionObservation obs;
        obs.label = t.topic;
        obs.features = t.features;
        obs.predicted_d = t.predicted_d;
        obs.realized_diversity = t.realized_diversity;
        observations.push_back(std::move(obs));
    }

    const RegressionSuite suite = run_regressions(observations);
    if (suite.dropped > 0)
        log << "regress: dropped " << suite.dropped
            << " topics (disconnected skeleton or non-positive diversity)\n";
    {
        CsvWriter out(dir / "regression.csv",
                      {"model", "term", "coef", "stderr", "tstat", "pvalue"});
        const auto dump = [&](const char* name, const RegressionFit& fit) {
            for (std::size_t j = 0; j < fit.terms.size(); ++j)
                out.row({name, fit.terms[j], fmt(fit.coefficients(j)),
                         fmt(fit.standard_errors(j)), fmt(fit.t_statistics(j)),
                         fmt(fit.p_values(j))});
            out.row({name, "r2", fmt(fit.r_squared), "", "", ""});
        };
        dump("M1", suite.m1);
        dump("M2", suite.m2);
        dump("M3", suite.m3);
    }
    write_manifest(cfg, dir);
    log << "regress: " << suite.used << " topics in the fits -> " << dir.string() << "\n";
}

}  // namespace opdyn

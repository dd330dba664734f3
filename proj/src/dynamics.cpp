#include "opdyn/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "opdyn/parallel.hpp"
#include "opdyn/spectral.hpp"

namespace opdyn {

ModelSpec ModelSpec::degroot(NoiseSpec noise) {
    ModelSpec m;
    m.dynamics = Dynamics::DeGroot;
    m.noise = noise;
    return m;
}

ModelSpec ModelSpec::fj(double susceptibility, Eigen::VectorXd prejudices, NoiseSpec noise) {
    ModelSpec m;
    m.dynamics = Dynamics::FriedkinJohnsen;
    m.susceptibility = susceptibility;
    m.prejudices = std::move(prejudices);
    m.noise = noise;
    return m;
}

ModelSpec ModelSpec::fj_random(double susceptibility, double prejudice_variance,
                               NoiseSpec noise) {
    ModelSpec m;
    m.dynamics = Dynamics::FriedkinJohnsen;
    m.susceptibility = susceptibility;
    m.prejudice_variance = prejudice_variance;
    m.noise = noise;
    return m;
}

namespace {

void validate_model(const ModelSpec& model, const TrustMatrix& a) {
    if (!(model.noise.sigma2 >= 0.0)) throw std::domain_error("model: sigma2 must be >= 0");
    if (!(model.noise.beta >= 0.0)) throw std::domain_error("model: beta must be >= 0");
    if (model.dynamics == ModelSpec::Dynamics::FriedkinJohnsen) {
        if (!(model.susceptibility >= 0.0 && model.susceptibility <= 1.0))
            throw std::domain_error("model: susceptibility must lie in [0, 1]");
        if (!(model.prejudice_variance >= 0.0))
            throw std::domain_error("model: prejudice variance must be >= 0");
        if (model.prejudices && model.prejudices->size() != a.size())
            throw std::invalid_argument("model: prejudice vector length must equal N");
    }
    if (model.noise.kind != NoiseSpec::Kind::None && !(a.max_row_sum() < 1.0))
        throw std::domain_error(
            "model: noisy dynamics on a row-stochastic matrix are not stationary; "
            "the trust matrix must be strictly substochastic");
}

void validate_config(const SimulationConfig& config) {
    if (config.steps < 1) throw std::invalid_argument("simulation: steps must be >= 1");
    if (config.burn_in < 0 || config.burn_in >= config.steps)
        throw std::invalid_argument("simulation: burn_in must lie in [0, steps)");
    if (config.replicas < 1) throw std::invalid_argument("simulation: replicas must be >= 1");
    if (config.initial_variance && !(*config.initial_variance >= 0.0))
        throw std::invalid_argument("simulation: initial variance must be >= 0");
    if (config.pool_snapshots < 1 || config.pool_stride < 1)
        throw std::invalid_argument("simulation: pool_snapshots and pool_stride must be >= 1");
    if (config.steps - (config.pool_snapshots - 1) * config.pool_stride < 1)
        throw std::invalid_argument(
            "simulation: the pooled snapshot window starts before the first step");
}

double initial_variance_of(const ModelSpec& model, const SimulationConfig& config) {
    if (config.initial_variance) return *config.initial_variance;
    return model.noise.kind == NoiseSpec::Kind::None ? 1.0 : model.noise.sigma2;
}

double median_inplace(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
    return 0.5 * (v[mid - 1] + hi);
}

// Window accumulator for the three dispersion summaries of one replica.
struct WindowStats {
    double sum_d = 0.0, sum_msd0 = 0.0, sum_mad = 0.0;
    int count = 0;
    std::vector<double> scratch;

    void record(const Eigen::VectorXd& y) {
        const double n = static_cast<double>(y.size());
        const double mean = y.mean();
        double d = 0.0, msd0 = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            const double v = y(i);
            d += (v - mean) * (v - mean);
            msd0 += v * v;
        }
        sum_d += d / n;
        sum_msd0 += msd0 / n;

        scratch.assign(y.data(), y.data() + y.size());
        const double med = median_inplace(scratch);
        for (double& x : scratch) x = std::abs(x - med);
        sum_mad += median_inplace(scratch);
        ++count;
    }
};

}  // namespace

Eigen::VectorXd noise_variances(const NoiseSpec& noise, const Eigen::VectorXd& y_prev,
                                const TrustMatrix& a) {
    const int n = a.size();
    if (y_prev.size() != n) throw std::invalid_argument("noise_variances: dimension mismatch");
    Eigen::VectorXd var(n);
    switch (noise.kind) {
        case NoiseSpec::Kind::None:
            var.setZero();
            break;
        case NoiseSpec::Kind::Iid:
            var.setConstant(noise.sigma2);
            break;
        case NoiseSpec::Kind::GlobalUniqueness: {
            const double mean = y_prev.mean();
            for (int i = 0; i < n; ++i) {
                const double dev = y_prev(i) - mean;
                var(i) = noise.sigma2 * std::exp(-noise.beta * dev * dev);
            }
            break;
        }
        case NoiseSpec::Kind::LocalUniqueness: {
            const auto& m = a.matrix();
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j : a.row_support()[i]) {
                    const double dev = y_prev(i) - y_prev(j);
                    acc += m(i, j) * std::exp(-noise.beta * dev * dev);
                }
                var(i) = noise.sigma2 * acc;
            }
            break;
        }
    }
    return var;
}

Eigen::VectorXd sample_noise(const NoiseSpec& noise, const Eigen::VectorXd& y_prev,
                             const TrustMatrix& a, Rng& rng) {
    if (noise.kind == NoiseSpec::Kind::None)
        return Eigen::VectorXd::Zero(a.size());
    Eigen::VectorXd eps = noise_variances(noise, y_prev, a);
    for (int i = 0; i < eps.size(); ++i) eps(i) = std::sqrt(eps(i)) * rng.normal();
    return eps;
}

namespace {

// Update with prejudices already resolved; shared by step() and run paths.
Eigen::VectorXd step_resolved(const ModelSpec& model, const TrustMatrix& a,
                              const Eigen::VectorXd& rho, const Eigen::VectorXd& y_prev,
                              Rng& rng) {
    Eigen::VectorXd y = a.matrix() * y_prev;
    if (model.dynamics == ModelSpec::Dynamics::FriedkinJohnsen) {
        const double s = model.susceptibility;
        y = s * y + (1.0 - s) * rho;
    }
    if (model.noise.kind != NoiseSpec::Kind::None) y += sample_noise(model.noise, y_prev, a, rng);
    return y;
}

}  // namespace

Eigen::VectorXd step(const ModelSpec& model, const TrustMatrix& a,
                     const Eigen::VectorXd& y_prev, Rng& rng) {
    validate_model(model, a);
    if (y_prev.size() != a.size()) throw std::invalid_argument("step: dimension mismatch");
    Eigen::VectorXd rho;
    if (model.dynamics == ModelSpec::Dynamics::FriedkinJohnsen) {
        if (!model.prejudices)
            throw std::invalid_argument(
                "step: FJ requires an explicit prejudice vector (run() draws "
                "random prejudices per replica)");
        rho = *model.prejudices;
    }
    return step_resolved(model, a, rho, y_prev, rng);
}

namespace {

ReplicaStats simulate_replica(const ModelSpec& model, const TrustMatrix& a,
                              const SimulationConfig& config, std::uint64_t seed,
                              Eigen::MatrixXd* full, Eigen::VectorXd* terminal,
                              std::vector<double>* pooled = nullptr) {
    const int n = a.size();
    Rng rng(seed);

    // Draw order is fixed (prejudices, then initial opinions, then shocks) so
    // that a recorded seed replays bit-identically.
    Eigen::VectorXd rho;
    if (model.dynamics == ModelSpec::Dynamics::FriedkinJohnsen) {
        if (model.prejudices) {
            rho = *model.prejudices;
        } else {
            const double sd = std::sqrt(model.prejudice_variance);
            rho.resize(n);
            for (int i = 0; i < n; ++i) rho(i) = sd * rng.normal();
        }
    }

    const double init_sd = std::sqrt(initial_variance_of(model, config));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = init_sd * rng.normal();

    if (full) {
        full->resize(config.steps + 1, n);
        full->row(0) = y.transpose();
    }

    WindowStats window;
    const int pool_from = config.steps - (config.pool_snapshots - 1) * config.pool_stride;
    for (int t = 1; t <= config.steps; ++t) {
        y = step_resolved(model, a, rho, y, rng);
        if (full) full->row(t) = y.transpose();
        if (t > config.burn_in) window.record(y);
        if (pooled && t >= pool_from && (config.steps - t) % config.pool_stride == 0)
            pooled->insert(pooled->end(), y.data(), y.data() + n);
    }
    if (terminal) *terminal = y;

    ReplicaStats stats;
    stats.seed = seed;
    stats.realized_d = window.sum_d / window.count;
    stats.msd_zero = window.sum_msd0 / window.count;
    stats.mad = window.sum_mad / window.count;
    return stats;
}

}  // namespace

Trajectory run(const ModelSpec& model, const TrustMatrix& a, const SimulationConfig& config) {
    validate_model(model, a);
    validate_config(config);
    Trajectory traj;
    traj.seed = config.seed;
    traj.model = model;
    simulate_replica(model, a, config, config.seed, &traj.opinions, nullptr);
    return traj;
}

ReplicaStats run_replica(const ModelSpec& model, const TrustMatrix& a,
                         const SimulationConfig& config, std::uint64_t seed,
                         Eigen::VectorXd* terminal) {
    validate_model(model, a);
    validate_config(config);
    return simulate_replica(model, a, config, seed, nullptr, terminal);
}

double EnsembleResult::mean_realized_d() const {
    double s = 0.0;
    for (const auto& r : replicas) s += r.realized_d;
    return s / static_cast<double>(replicas.size());
}

double EnsembleResult::mean_msd_zero() const {
    double s = 0.0;
    for (const auto& r : replicas) s += r.msd_zero;
    return s / static_cast<double>(replicas.size());
}

double EnsembleResult::mean_mad() const {
    double s = 0.0;
    for (const auto& r : replicas) s += r.mad;
    return s / static_cast<double>(replicas.size());
}

EnsembleResult run_ensemble(const ModelSpec& model, const TrustMatrix& a,
                            const SimulationConfig& config, int jobs) {
    validate_model(model, a);
    validate_config(config);

    const int n = a.size();
    const std::size_t pool_per_replica = static_cast<std::size_t>(config.pool_snapshots) * n;
    EnsembleResult result;
    result.replicas.resize(config.replicas);
    result.pooled_terminal.assign(static_cast<std::size_t>(config.replicas) * pool_per_replica,
                                  0.0);

    parallel_for(static_cast<std::size_t>(config.replicas), jobs, [&](std::size_t r) {
        std::vector<double> pool;
        pool.reserve(pool_per_replica);
        const std::uint64_t seed = derive_seed(config.seed, r);
        result.replicas[r] = simulate_replica(model, a, config, seed, nullptr, nullptr, &pool);
        std::copy(pool.begin(), pool.end(),
                  result.pooled_terminal.begin() + r * pool_per_replica);
    });

    // Closed-form reference for the same graph. For adaptive noise this is the
    // beta = 0 (i.i.d.) value, which upper-bounds the adaptive dynamics.
    result.predicted_d = std::numeric_limits<double>::quiet_NaN();
    try {
        const Spectrum s = spectrum(a);
        if (model.dynamics == ModelSpec::Dynamics::DeGroot) {
            result.predicted_d = diversity_degroot(s, model.noise.sigma2).d;
        } else {
            double xi2 = model.prejudice_variance;
            if (model.prejudices && model.prejudices->size() > 0) {
                const auto& rho = *model.prejudices;
                const double mean = rho.mean();
                xi2 = (rho.array() - mean).square().sum() / static_cast<double>(rho.size());
            }
            result.predicted_d = diversity_fj(s, model.noise.sigma2, xi2, model.susceptibility).d;
        }
    } catch (const std::exception&) {
        // directed/complex spectra have no exact expression; leave NaN
    }
    return result;
}

std::vector<double> thin_pooled_sample(const EnsembleResult& ensemble, int n_nodes,
                                       int nodes_per_snapshot) {
    if (n_nodes < 1 || nodes_per_snapshot < 1 || nodes_per_snapshot > n_nodes)
        throw std::invalid_argument("thin_pooled_sample: bad node counts");
    const std::size_t snapshots = ensemble.pooled_terminal.size() / n_nodes;
    std::vector<double> out;
    out.reserve(snapshots * nodes_per_snapshot);
    for (std::size_t q = 0; q < snapshots; ++q)
        for (int k = 0; k < nodes_per_snapshot; ++k)
            out.push_back(
                ensemble.pooled_terminal[q * n_nodes +
                                         (q * nodes_per_snapshot + k) % n_nodes]);
    return out;
}

Eigen::VectorXd fj_fixed_point(const TrustMatrix& a, double susceptibility,
                               const Eigen::VectorXd& rho) {
    if (!(susceptibility >= 0.0 && susceptibility <= 1.0))
        throw std::domain_error("fj_fixed_point: susceptibility must lie in [0, 1]");
    if (rho.size() != a.size()) throw std::invalid_argument("fj_fixed_point: dimension mismatch");
    const int n = a.size();
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - susceptibility * a.matrix();
    const Eigen::VectorXd b = (1.0 - susceptibility) * rho;
    const Eigen::VectorXd y = system.partialPivLu().solve(b);
    const double residual = (system * y - b).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (!y.allFinite() || residual > 1e-8 * scale)
        throw std::runtime_error("fj_fixed_point: singular system (s * lambda_1 >= 1)");
    return y;
}

}  // namespace opdyn

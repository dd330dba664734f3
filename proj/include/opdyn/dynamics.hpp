#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "opdyn/rng.hpp"
#include "opdyn/trust.hpp"

namespace opdyn {

/// Per-step shock distribution. All regimes draw independent Gaussians per
/// agent; they differ in how the per-agent variance is formed:
///   Iid               : sigma2 for everyone
///   GlobalUniqueness  : sigma2 * exp(-beta (y_i - mean(y))^2)
///   LocalUniqueness   : sigma2 * sum_j A_ij exp(-beta (y_i - y_j)^2)
/// beta = 0 recovers (near-)i.i.d. behavior; beta -> inf recovers the
/// deterministic dynamics.
struct NoiseSpec {
    enum class Kind { None, Iid, GlobalUniqueness, LocalUniqueness };

    Kind kind = Kind::None;
    double sigma2 = 0.0;
    double beta = 0.0;

    static NoiseSpec none() { return {}; }
    static NoiseSpec iid(double sigma2) { return {Kind::Iid, sigma2, 0.0}; }
    static NoiseSpec global_uniqueness(double sigma2, double beta) {
        return {Kind::GlobalUniqueness, sigma2, beta};
    }
    static NoiseSpec local_uniqueness(double sigma2, double beta) {
        return {Kind::LocalUniqueness, sigma2, beta};
    }
};

/// Which averaging dynamics to run, with the noise regime attached.
/// DeGroot:          y_t = A y_{t-1} + eps_t
/// Friedkin-Johnsen: y_t = s A y_{t-1} + (1-s) rho + eps_t, s in [0, 1].
/// Prejudices rho are either fixed explicitly or drawn i.i.d. N(0, xi2) once
/// per replica.
struct ModelSpec {
    enum class Dynamics { DeGroot, FriedkinJohnsen };

    Dynamics dynamics = Dynamics::DeGroot;
    NoiseSpec noise;
    double susceptibility = 1.0;                // FJ only
    std::optional<Eigen::VectorXd> prejudices;  // FJ: explicit vector
    double prejudice_variance = 0.0;            // FJ: xi^2 for per-replica draws

    static ModelSpec degroot(NoiseSpec noise = NoiseSpec::none());
    static ModelSpec fj(double susceptibility, Eigen::VectorXd prejudices,
                        NoiseSpec noise = NoiseSpec::none());
    static ModelSpec fj_random(double susceptibility, double prejudice_variance,
                               NoiseSpec noise = NoiseSpec::none());
};

struct SimulationConfig {
    enum class Record { FullTrajectory, TerminalState, WindowedDiversity };

    int steps = 500;
    int burn_in = 100;  // measurement window is t in (burn_in, steps]
    int replicas = 1;
    std::uint64_t seed = 0;
    Record record = Record::WindowedDiversity;

    /// Terminal pooling: each replica contributes the opinion snapshots at
    /// t = steps - j * pool_stride for j = 0..pool_snapshots-1. The default
    /// pools the terminal state only; wider windows decorrelate the slow
    /// consensus mode across pooled samples.
    int pool_snapshots = 1;
    int pool_stride = 50;

    /// Variance of the i.i.d. Gaussian initial opinions. Defaults to the
    /// noise sigma2 for noisy models (any square-integrable start relaxes to
    /// the same stationary law) and 1.0 for deterministic ones.
    std::optional<double> initial_variance;
};

/// Per-agent shock variances for one update, before any sampling.
Eigen::VectorXd noise_variances(const NoiseSpec& noise, const Eigen::VectorXd& y_prev,
                                const TrustMatrix& a);

/// One draw of the shock vector.
Eigen::VectorXd sample_noise(const NoiseSpec& noise, const Eigen::VectorXd& y_prev,
                             const TrustMatrix& a, Rng& rng);

/// Synchronous one-step update of all agents. FJ models require explicit
/// prejudices here; run() handles the per-replica random draw.
Eigen::VectorXd step(const ModelSpec& model, const TrustMatrix& a,
                     const Eigen::VectorXd& y_prev, Rng& rng);

struct Trajectory {
    Eigen::MatrixXd opinions;  // (steps + 1) x N, row t = opinions after t updates
    std::uint64_t seed = 0;
    ModelSpec model;
};

/// Simulate one full trajectory with the config's seed.
Trajectory run(const ModelSpec& model, const TrustMatrix& a, const SimulationConfig& config);

/// Summary of one replica over the post-burn-in window.
///   realized_d : mean_t of the cross-sectional variance about the sample
///                mean (the sample-mean-centered diversity estimator)
///   msd_zero   : mean_t of the cross-sectional mean square about zero (the
///                trace-of-covariance estimator the closed forms predict)
///   mad        : mean_t of the cross-sectional median absolute deviation
struct ReplicaStats {
    std::uint64_t seed = 0;
    double realized_d = 0.0;
    double msd_zero = 0.0;
    double mad = 0.0;
};

/// Simulate one replica from an explicit seed and return its window summary
/// (optionally its terminal opinions). This is the replay entry point for
/// report rows.
ReplicaStats run_replica(const ModelSpec& model, const TrustMatrix& a,
                         const SimulationConfig& config, std::uint64_t seed,
                         Eigen::VectorXd* terminal = nullptr);

struct EnsembleResult {
    std::vector<ReplicaStats> replicas;
    // replica-major; within a replica, snapshots oldest to terminal;
    // replicas * pool_snapshots * N values
    std::vector<double> pooled_terminal;
    double predicted_d = 0.0;  // NaN when no closed form applies

    double mean_realized_d() const;
    double mean_msd_zero() const;
    double mean_mad() const;
};

/// Run config.replicas independent replicas with seeds split from
/// config.seed. Replicas may execute on `jobs` worker threads; outputs are
/// identical for any jobs value.
EnsembleResult run_ensemble(const ModelSpec& model, const TrustMatrix& a,
                            const SimulationConfig& config, int jobs = 1);

/// Near-i.i.d. subsample of a pooled ensemble: nodes_per_snapshot rotating
/// node opinions from every pooled snapshot. Opinions within one snapshot
/// share the slow consensus coordinate, so a goodness-of-fit test that
/// assumes independent draws needs this thinning; with snapshots spaced a few
/// consensus relaxation times apart the result is an i.i.d. sample of the
/// stationary marginal.
std::vector<double> thin_pooled_sample(const EnsembleResult& ensemble, int n_nodes,
                                       int nodes_per_snapshot);

/// Fixed point of the deterministic anchored dynamics,
/// y* = (I - sA)^{-1} (1-s) rho, via a dense linear solve.
Eigen::VectorXd fj_fixed_point(const TrustMatrix& a, double susceptibility,
                               const Eigen::VectorXd& rho);

}  // namespace opdyn

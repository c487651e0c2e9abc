#ifndef MFBO_SURROGATE_HPP
#define MFBO_SURROGATE_HPP

#include <span>

#include "mfbo/core.hpp"

namespace mfbo {

/// Free parameters of the two-fidelity GP kernel: an RBF over min-max scaled
/// features times a 2x2 coregionalization matrix B = [[1, rho], [rho, 1]].
/// Noise terms are in standardized-target units.
struct KernelParams {
    double signal_variance = 1.0;
    Eigen::VectorXd lengthscale =
        Eigen::VectorXd::Ones(1);  // 1 entry (isotropic) or d entries (ARD)
    double fidelity_corr = 0.5;
    double noise_low = 1e-3;
    double noise_high = 1e-3;

    double noise(Fid m) const { return m == Fid::High ? noise_high : noise_low; }
};

struct FitConfig {
    bool ard = false;
    int max_iterations = 200;  // pattern-search sweeps per start
    int restarts = 4;          // fixed initializations, plus warm_start if set
    std::optional<KernelParams> warm_start;
};

constexpr double kNoiseFloor = 1e-10;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-2;

/// Fitted two-fidelity GP surrogate. Immutable after construction; posterior
/// queries are read-only.
class GpModel {
public:
    /// Maximizes the log marginal likelihood over log-transformed parameters
    /// with a coordinate-wise pattern search from multiple fixed starts.
    /// Requires >= 2 observations with at least one HIGH.
    static GpModel fit(std::span<const Observation> observations,
                       const ProblemSpec& problem, const FitConfig& config = {},
                       std::uint64_t rng_seed = 0);

    /// Conditions on the observations with the given fixed hyperparameters
    /// (no fitting). Observations may be empty (prior model).
    static GpModel build(const KernelParams& params,
                         std::span<const Observation> observations,
                         const ProblemSpec& problem);

    /// Posterior mean (original target units) and latent variance (original
    /// units squared, >= 0, excludes observation noise) at raw-feature queries.
    std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior(
        const Eigen::MatrixXd& query_features, const std::vector<Fid>& query_fids) const;

    std::pair<double, double> posterior1(const Eigen::VectorXd& features, Fid m) const;

    /// Posterior covariance between the latent values at two queries,
    /// original units squared.
    double posterior_cov(const Eigen::VectorXd& a, Fid fid_a,
                         const Eigen::VectorXd& b, Fid fid_b) const;

    const KernelParams& params() const { return params_; }
    double lml() const { return lml_; }
    double target_mean() const { return target_mean_; }
    double target_std() const { return target_std_; }
    Eigen::Index train_size() const {
        return static_cast<Eigen::Index>(train_fids_.size());
    }
    bool has_fidelity(Fid m) const {
        for (Fid f : train_fids_)
            if (f == m) return true;
        return false;
    }

    /// Observation noise variance at fidelity m in original target units.
    double observation_noise(Fid m) const {
        return params_.noise(m) * target_std_ * target_std_;
    }

private:
    GpModel() = default;

    Eigen::VectorXd scale_query(const Eigen::VectorXd& raw) const;
    // k(q, x_i) over all training points, standardized units
    Eigen::VectorXd kernel_vector(const Eigen::VectorXd& scaled, Fid m) const;
    double kernel_scalar(const Eigen::VectorXd& sa, Fid ma,
                         const Eigen::VectorXd& sb, Fid mb) const;

    KernelParams params_;
    Eigen::MatrixXd train_scaled_;  // n x d
    std::vector<Fid> train_fids_;
    Eigen::VectorXd alpha_;        // (K + noise + jitter)^-1 y_std
    Eigen::MatrixXd chol_lower_;   // L with L L^T = K + noise + jitter
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
    Eigen::VectorXd feat_min_, feat_range_;  // domain-wide scaling constants
    double lml_ = 0.0;
};

/// Log marginal likelihood of the standardized targets under the given
/// parameters (standardization and feature scaling as in GpModel::fit).
/// Throws if the kernel matrix stays non-positive-definite at maximum jitter.
double log_marginal_likelihood(const KernelParams& params,
                               std::span<const Observation> observations,
                               const ProblemSpec& problem);

}  // namespace mfbo

#endif

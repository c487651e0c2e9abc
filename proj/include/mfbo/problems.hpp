#ifndef MFBO_PROBLEMS_HPP
#define MFBO_PROBLEMS_HPP

#include <filesystem>

#include "mfbo/core.hpp"

namespace mfbo {

/// Controls the correlated Gaussian-noise generator for synthetic
/// low-fidelity data.
struct NoiseSpec {
    double target_corr = 0.88;  // expected Pearson correlation, in (0, 1]
    std::uint64_t rng_seed = 0;
};

/// y_low[i] = y_high[i] + eps_i with eps ~ N(0, sigma_n^2) and sigma_n chosen
/// so the expected Pearson correlation with y_high equals noise.target_corr.
/// Throws when y_high has zero variance.
Eigen::VectorXd make_low_fidelity(const Eigen::VectorXd& y_high, const NoiseSpec& noise);

/// Scalar RKHS benchmark function on [0, 1]: a fixed mixture of broad and
/// narrow RBF bumps with multiple local maxima.
double rkhs_value(double x);

/// 500-point grid on [0, 1] with the RKHS function at HIGH and noisy LOW.
ProblemSpec rkhs_problem(double cost_low, const NoiseSpec& noise);

/// Negated 6D Hartmann value (to be maximized; global maximum ~3.32237).
double hartmann6_value(const Eigen::VectorXd& x);

/// The published global maximizer of the negated 6D Hartmann function.
Eigen::VectorXd hartmann6_argmax();

/// n_points uniform samples in [0,1]^6 (seeded) plus the known maximizer
/// appended as the final candidate; LOW via make_low_fidelity.
ProblemSpec hartmann6_problem(Eigen::Index n_points, double cost_low,
                              const NoiseSpec& noise, std::uint64_t rng_seed);

/// Combined photovoltaic target: -|E_S1 - 3| - |IP - 5.5| + ln(f_osc_S1).
double f_comb(double E_S1, double IP, double f_osc_S1);

/// Loads a candidate table. Expected header:
///   id, f_0 .. f_{d-1}, y_high, y_low [, b_0 .. b_{k-1}] [, E_S1, IP, f_osc_S1]
/// With recompute_target, y_high is replaced by f_comb of the property
/// columns (which must then be present).
ProblemSpec load_tabular_problem(const std::filesystem::path& path, double cost_low,
                                 bool recompute_target = false);

/// Writes a ProblemSpec back out in the tabular CSV schema above.
void save_tabular_problem(const ProblemSpec& problem, const std::filesystem::path& path);

/// Synthetic stand-in for the COF selectivity table: 608 candidates with
/// 14 features, LOW/HIGH correlation ~0.97. Deterministic.
ProblemSpec cof_problem(double cost_low = 0.2);

/// Synthetic stand-in for the oligomer table: block-structured candidates
/// (arity 6, 306 block types), 72-dimensional features, HIGH targets through
/// f_comb, LOW/HIGH correlation ~0.91. Deterministic.
ProblemSpec oligomer_problem(Eigen::Index n_points = 44928, double cost_low = 0.1);

}  // namespace mfbo

#endif

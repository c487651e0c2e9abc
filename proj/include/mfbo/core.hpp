#ifndef MFBO_CORE_HPP
#define MFBO_CORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfbo {

/// Evaluation accuracy tier. HIGH is the ground-truth objective and always
/// costs 1.0; LOW is a cheap correlated proxy with cost in (0, 1].
enum class Fid { Low, High };

inline const char* to_string(Fid m) { return m == Fid::High ? "high" : "low"; }

/// A finite candidate domain with tabulated objective values at both
/// fidelities. Immutable after construction; safe to share across runs.
struct ProblemSpec {
    Eigen::MatrixXd features;  // n x d
    Eigen::VectorXd y_high;    // length n
    Eigen::VectorXd y_low;     // length n
    double cost_low = 0.1;
    std::string name;
    double optimum = 0.0;
    Eigen::Index optimum_index = 0;

    // Optional block decomposition for evolutionary candidate proposal
    // (n x arity integer matrix; empty when the domain has no block structure).
    Eigen::MatrixXi blocks;

    Eigen::Index size() const { return y_high.size(); }
    Eigen::Index dim() const { return features.cols(); }

    double value(Eigen::Index i, Fid m) const {
        return m == Fid::High ? y_high(i) : y_low(i);
    }
    double cost(Fid m) const { return m == Fid::High ? 1.0 : cost_low; }
};

/// Validates and assembles a ProblemSpec; computes optimum and its index
/// (ties break to the lowest index).
ProblemSpec make_problem(Eigen::MatrixXd features, Eigen::VectorXd y_high,
                         Eigen::VectorXd y_low, double cost_low,
                         std::string name);

/// One (candidate, fidelity) evaluation together with the budget spent up to
/// and including it.
struct Observation {
    Eigen::Index candidate = 0;
    Fid fidelity = Fid::High;
    double value = 0.0;
    double cumulative_cost = 0.0;
};

enum class StopReason { Optimum, Budget, Exhausted };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Optimum: return "optimum";
        case StopReason::Budget: return "budget";
        default: return "exhausted";
    }
}

/// Ordered history of a single optimization run with its budget ledger.
struct Trace {
    std::vector<Observation> seed_observations;
    std::vector<Observation> step_observations;
    double budget = 0.0;
    std::uint64_t rng_seed = 0;
    // Budget spent when a HIGH observation first hits the domain optimum
    // (exact table equality); empty if the optimum was never observed at HIGH.
    std::optional<double> reached_optimum_at;
    StopReason stop = StopReason::Budget;

    double spent() const {
        if (!step_observations.empty())
            return step_observations.back().cumulative_cost;
        if (!seed_observations.empty())
            return seed_observations.back().cumulative_cost;
        return 0.0;
    }

    std::vector<Observation> all_observations() const {
        std::vector<Observation> all = seed_observations;
        all.insert(all.end(), step_observations.begin(), step_observations.end());
        return all;
    }
};

}  // namespace mfbo

#endif

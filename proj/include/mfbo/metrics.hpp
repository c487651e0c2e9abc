#ifndef MFBO_METRICS_HPP
#define MFBO_METRICS_HPP

#include "mfbo/core.hpp"

namespace mfbo {

struct CrhfResult {
    // one term per interval: seeding is interval 0, then one per step
    std::vector<std::pair<int, double>> series;
    double total = 0.0;
};

/// Budget spent when the optimum was first observed at HIGH, or the capped
/// score when the run missed it.
double budget_to_optimum(const Trace& trace, double cap = 60.0);

/// mean(mf_scores) / sf_baseline.
double relative_improvement(const std::vector<double>& mf_scores, double sf_baseline);

/// Cumulative regret per high-fidelity evaluation: per interval, the regret
/// of the most recent HIGH observation divided by the number of HIGH
/// observations so far, summed over intervals.
CrhfResult crhf(const Trace& trace, double optimum);

/// Standard Pearson correlation coefficient; throws on zero variance.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace mfbo

#endif

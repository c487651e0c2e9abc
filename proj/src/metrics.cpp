#include "mfbo/metrics.hpp"

#include <cmath>

namespace mfbo {

double budget_to_optimum(const Trace& trace, double cap) {
    return trace.reached_optimum_at.value_or(cap);
}

double relative_improvement(const std::vector<double>& mf_scores, double sf_baseline) {
    if (!(sf_baseline > 0.0))
        throw std::invalid_argument("relative_improvement: baseline must be positive, got " +
                                    std::to_string(sf_baseline));
    if (mf_scores.empty())
        throw std::invalid_argument("relative_improvement: need at least one score");
    double sum = 0.0;
    for (double s : mf_scores) sum += s;
    return sum / static_cast<double>(mf_scores.size()) / sf_baseline;
}

CrhfResult crhf(const Trace& trace, double optimum) {
    // interval 0 covers seeding; each acquisition step is one interval
    double last_high = 0.0;
    int n_high = 0;
    for (const Observation& o : trace.seed_observations)
        if (o.fidelity == Fid::High) {
            last_high = o.value;
            ++n_high;
        }
    if (n_high == 0)
        throw std::invalid_argument("crhf: no HIGH observation before the first interval");

    CrhfResult r;
    r.series.emplace_back(0, (optimum - last_high) / n_high);
    int interval = 1;
    for (const Observation& o : trace.step_observations) {
        if (o.fidelity == Fid::High) {
            last_high = o.value;
            ++n_high;
        }
        r.series.emplace_back(interval++, (optimum - last_high) / n_high);
    }
    for (const auto& [i, term] : r.series) r.total += term;
    return r;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("pearson: vectors must have equal length >= 2");
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double va = da.square().sum(), vb = db.square().sum();
    if (va <= 0.0 || vb <= 0.0)
        throw std::invalid_argument("pearson: zero variance input");
    return (da * db).sum() / std::sqrt(va * vb);
}

}  // namespace mfbo

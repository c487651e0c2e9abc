#include "mfbo/core.hpp"

namespace mfbo {

ProblemSpec make_problem(Eigen::MatrixXd features, Eigen::VectorXd y_high,
                         Eigen::VectorXd y_low, double cost_low,
                         std::string name) {
    const Eigen::Index n = features.rows();
    if (n < 2)
        throw std::invalid_argument("make_problem: need at least 2 candidates, got " +
                                    std::to_string(n));
    if (y_high.size() != n)
        throw std::invalid_argument("make_problem: y_high length " +
                                    std::to_string(y_high.size()) +
                                    " does not match candidate count " + std::to_string(n));
    if (y_low.size() != n)
        throw std::invalid_argument("make_problem: y_low length " +
                                    std::to_string(y_low.size()) +
                                    " does not match candidate count " + std::to_string(n));
    if (!(cost_low > 0.0 && cost_low <= 1.0))
        throw std::invalid_argument("make_problem: cost_low must lie in (0, 1], got " +
                                    std::to_string(cost_low));
    if (!features.allFinite())
        throw std::invalid_argument("make_problem: non-finite entry in features");
    if (!y_high.allFinite())
        throw std::invalid_argument("make_problem: non-finite entry in y_high");
    if (!y_low.allFinite())
        throw std::invalid_argument("make_problem: non-finite entry in y_low");

    ProblemSpec p;
    p.features = std::move(features);
    p.y_high = std::move(y_high);
    p.y_low = std::move(y_low);
    p.cost_low = cost_low;
    p.name = std::move(name);

    p.optimum_index = 0;
    p.optimum = p.y_high(0);
    for (Eigen::Index i = 1; i < n; ++i) {
        if (p.y_high(i) > p.optimum) {  // strict: ties keep the lowest index
            p.optimum = p.y_high(i);
            p.optimum_index = i;
        }
    }
    return p;
}

}  // namespace mfbo

#ifndef MFBO_STATS_HPP
#define MFBO_STATS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace mfbo {

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

inline double log_norm_cdf(double x) {
    if (x < -30.0) {
        // asymptotic expansion; erfc underflows near -37
        const double x2 = x * x;
        return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
               std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
    }
    return std::log(norm_cdf(x));
}

/// Gauss-Hermite nodes/weights (physicists' convention, weight e^{-t^2})
/// via the Golub-Welsch eigendecomposition of the Jacobi matrix.
struct GaussHermite {
    Eigen::VectorXd nodes, weights;

    explicit GaussHermite(int n) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) {
            const double b = std::sqrt(i / 2.0);
            J(i, i - 1) = b;
            J(i - 1, i) = b;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        nodes = es.eigenvalues();
        weights.resize(n);
        const double sqrt_pi = std::sqrt(std::numbers::pi);
        for (int i = 0; i < n; ++i) {
            const double v0 = es.eigenvectors()(0, i);
            weights(i) = sqrt_pi * v0 * v0;
        }
    }
};

}  // namespace mfbo

#endif

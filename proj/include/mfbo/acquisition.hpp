#ifndef MFBO_ACQUISITION_HPP
#define MFBO_ACQUISITION_HPP

#include <set>
#include <utility>

#include "mfbo/core.hpp"
#include "mfbo/surrogate.hpp"

namespace mfbo {

struct PairKey {
    Eigen::Index candidate = 0;
    Fid fidelity = Fid::High;

    friend bool operator==(const PairKey&, const PairKey&) = default;
    friend auto operator<=>(const PairKey& a, const PairKey& b) {
        if (auto c = a.candidate <=> b.candidate; c != 0) return c;
        return static_cast<int>(a.fidelity) <=> static_cast<int>(b.fidelity);
    }
};

/// Acquisition values over an explicit (candidate, fidelity) pair list,
/// ready for argmax selection.
struct AcqScores {
    std::vector<PairKey> pairs;
    Eigen::VectorXd scores;
};

/// Closed-form expected improvement of a Gaussian over the incumbent.
double ei_value(double mean, double stddev, double incumbent);

/// The per-f* entropy-gain term for a HIGH-fidelity observation,
/// gamma * pdf(gamma) / (2 cdf(gamma)) - ln cdf(gamma).
double mes_high_term(double gamma);

/// Single-fidelity expected improvement over the pool at HIGH only.
/// incumbent is the best HIGH observation so far.
AcqScores sf_ei(const GpModel& model, const ProblemSpec& problem,
                const std::vector<Eigen::Index>& pool, double incumbent);

/// Cost-scaled mutual information with the HIGH-fidelity maximum, over
/// pool x {LOW, HIGH}. f* is drawn from a Gumbel approximation to the
/// posterior pool-max CDF; LOW pairs use bivariate quadrature.
AcqScores mf_mes(const GpModel& model, const ProblemSpec& problem,
                 const std::vector<Eigen::Index>& pool, std::uint64_t rng_seed,
                 int n_fstar = 16);

/// Cost-scaled one-step variance reduction at the EI-optimal candidate,
/// scaled by that candidate's EI, over pool x {LOW, HIGH}.
AcqScores mf_tvr(const GpModel& model, const ProblemSpec& problem,
                 const std::vector<Eigen::Index>& pool, double incumbent);

/// Sum of the L2-normalized score vectors (zero-norm inputs contribute a
/// zero vector). Pair lists must match exactly.
AcqScores mf_custom(const AcqScores& mes, const AcqScores& tvr);

/// Argmax over pairs not yet observed; ties prefer HIGH, then the lowest
/// candidate index. Throws when every pair is excluded.
PairKey select_next(const AcqScores& scores, const std::set<PairKey>& observed);

}  // namespace mfbo

#endif

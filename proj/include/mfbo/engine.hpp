#ifndef MFBO_ENGINE_HPP
#define MFBO_ENGINE_HPP

#include <functional>
#include <unordered_map>

#include "mfbo/acquisition.hpp"
#include "mfbo/core.hpp"
#include "mfbo/surrogate.hpp"

namespace mfbo {

enum class Acq { SfEi, MfMes, MfTvr, MfCustom };

const char* to_string(Acq a);
Acq acq_from_string(const std::string& name);  // "sf-ei", "mf-mes", ...

enum class PoolStrategy { Exhaustive, Evolutionary };

/// Evolutionary candidate-proposal settings for block-structured domains.
struct GaConfig {
    int block_arity = 6;
    int population = 128;
    int generations = 8;
    double mutation_rate = 0.1;
    double elite_fraction = 0.25;
};

struct RunConfig {
    int n_seed = 5;
    double budget = 50.0;
    Acq acquisition = Acq::MfMes;
    std::uint64_t rng_seed = 0;
    PoolStrategy pool_strategy = PoolStrategy::Exhaustive;
    std::optional<GaConfig> ga;
    FitConfig fit;
    // After this many loop iterations the hyperparameter search keeps only
    // the warm start plus one fixed restart (-1: never reduce).
    int reduce_restarts_after = -1;
    // Full hyperparameter refit every k iterations; in between the model is
    // re-conditioned on the new data with the previous parameters.
    int refit_every = 1;
    int mes_fstar = 16;
};

/// n_seed distinct candidates drawn uniformly without replacement, each
/// evaluated at BOTH fidelities; charges n_seed * (1 + cost_low) of budget.
std::vector<Observation> seed_design(const ProblemSpec& problem, int n_seed,
                                     std::uint64_t rng_seed);

/// The budget-accounted optimization loop: fit, score, select, observe,
/// repeat until a HIGH observation hits the domain optimum, the budget is
/// spent, or the domain is exhausted.
Trace run_bo(const ProblemSpec& problem, const RunConfig& config);

/// Per-candidate desirability used to steer the evolutionary proposer.
using PoolScoreFn = std::function<Eigen::VectorXd(const std::vector<Eigen::Index>&)>;

/// Maps packed block tuples to table rows.
std::unordered_map<std::uint64_t, Eigen::Index> block_index(const ProblemSpec& problem);

/// Elitist GA over block tuples: crossover and mutation of the strongest
/// candidates, proposals outside the table discarded. Returns the union of
/// all valid candidates scored across generations (ascending, deduplicated).
std::vector<Eigen::Index> propose_pool_evolutionary(
    const ProblemSpec& problem, const PoolScoreFn& score, const GaConfig& ga,
    std::uint64_t rng_seed, const std::vector<Observation>& history,
    const std::unordered_map<std::uint64_t, Eigen::Index>& index);

}  // namespace mfbo

#endif

#include "mfbo/engine.hpp"

#include <algorithm>
#include <random>

namespace mfbo {

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t pack_blocks(const Eigen::MatrixXi& blocks, Eigen::Index row, int n_types) {
    std::uint64_t key = 0;
    for (Eigen::Index k = 0; k < blocks.cols(); ++k)
        key = key * static_cast<std::uint64_t>(n_types) +
              static_cast<std::uint64_t>(blocks(row, k));
    return key;
}

}  // namespace

const char* to_string(Acq a) {
    switch (a) {
        case Acq::SfEi: return "sf-ei";
        case Acq::MfMes: return "mf-mes";
        case Acq::MfTvr: return "mf-tvr";
        default: return "mf-custom";
    }
}

Acq acq_from_string(const std::string& name) {
    if (name == "sf-ei") return Acq::SfEi;
    if (name == "mf-mes") return Acq::MfMes;
    if (name == "mf-tvr") return Acq::MfTvr;
    if (name == "mf-custom") return Acq::MfCustom;
    throw std::invalid_argument("unknown acquisition '" + name +
                                "' (expected sf-ei|mf-mes|mf-tvr|mf-custom)");
}

std::vector<Observation> seed_design(const ProblemSpec& problem, int n_seed,
                                     std::uint64_t rng_seed) {
    const Eigen::Index n = problem.size();
    if (n_seed < 1 || static_cast<Eigen::Index>(n_seed) > n)
        throw std::invalid_argument("seed_design: n_seed " + std::to_string(n_seed) +
                                    " out of range for domain size " + std::to_string(n));
    std::mt19937_64 rng(rng_seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    // partial Fisher-Yates: the first n_seed entries form the sample
    for (int k = 0; k < n_seed; ++k) {
        std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<Observation> obs;
    obs.reserve(2 * static_cast<std::size_t>(n_seed));
    double spent = 0.0;
    for (int k = 0; k < n_seed; ++k) {
        const Eigen::Index c = idx[static_cast<std::size_t>(k)];
        spent += 1.0;
        obs.push_back({c, Fid::High, problem.value(c, Fid::High), spent});
        spent += problem.cost_low;
        obs.push_back({c, Fid::Low, problem.value(c, Fid::Low), spent});
    }
    return obs;
}

std::unordered_map<std::uint64_t, Eigen::Index> block_index(const ProblemSpec& problem) {
    if (problem.blocks.cols() == 0)
        throw std::invalid_argument("block_index: dataset has no block columns");
    const int n_types = problem.blocks.maxCoeff() + 1;
    std::unordered_map<std::uint64_t, Eigen::Index> index;
    index.reserve(static_cast<std::size_t>(problem.size()));
    for (Eigen::Index i = 0; i < problem.size(); ++i)
        index.emplace(pack_blocks(problem.blocks, i, n_types), i);
    return index;
}

std::vector<Eigen::Index> propose_pool_evolutionary(
    const ProblemSpec& problem, const PoolScoreFn& score, const GaConfig& ga,
    std::uint64_t rng_seed, const std::vector<Observation>& history,
    const std::unordered_map<std::uint64_t, Eigen::Index>& index) {
    if (problem.blocks.cols() == 0)
        throw std::invalid_argument("propose_pool_evolutionary: dataset has no block columns");
    if (ga.population < 2)
        throw std::invalid_argument("propose_pool_evolutionary: population must be >= 2");
    const int arity = static_cast<int>(problem.blocks.cols());
    const int n_types = problem.blocks.maxCoeff() + 1;
    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<Eigen::Index> any_row(0, problem.size() - 1);
    std::uniform_int_distribution<int> any_type(0, n_types - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // initial population: best observed candidates first, random rows after
    std::vector<std::pair<double, Eigen::Index>> ranked;
    for (const Observation& o : history)
        if (o.fidelity == Fid::High) ranked.emplace_back(o.value, o.candidate);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    });
    std::vector<Eigen::Index> population;
    std::set<Eigen::Index> in_pop;
    for (const auto& [v, c] : ranked) {
        if (static_cast<int>(population.size()) >= ga.population / 2) break;
        if (in_pop.insert(c).second) population.push_back(c);
    }
    while (static_cast<int>(population.size()) < ga.population)
        population.push_back(any_row(rng));

    std::set<Eigen::Index> pool(population.begin(), population.end());
    const int n_elite =
        std::max(1, static_cast<int>(std::ceil(ga.elite_fraction * ga.population)));

    for (int gen = 0; gen < ga.generations; ++gen) {
        const Eigen::VectorXd fitness = score(population);
        std::vector<int> order(population.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return fitness(a) > fitness(b) ||
                   (fitness(a) == fitness(b) && population[static_cast<std::size_t>(a)] <
                                                    population[static_cast<std::size_t>(b)]);
        });
        std::vector<Eigen::Index> next;
        for (int e = 0; e < n_elite && e < static_cast<int>(order.size()); ++e)
            next.push_back(population[static_cast<std::size_t>(order[e])]);
        std::uniform_int_distribution<int> pick_elite(0, static_cast<int>(next.size()) - 1);
        while (static_cast<int>(next.size()) < ga.population) {
            const Eigen::Index pa = next[static_cast<std::size_t>(pick_elite(rng))];
            const Eigen::Index pb = next[static_cast<std::size_t>(pick_elite(rng))];
            std::uint64_t key = 0;
            for (int k = 0; k < arity; ++k) {
                int b = (unif(rng) < 0.5 ? problem.blocks(pa, k) : problem.blocks(pb, k));
                if (unif(rng) < ga.mutation_rate) b = any_type(rng);
                key = key * static_cast<std::uint64_t>(n_types) + static_cast<std::uint64_t>(b);
            }
            const auto hit = index.find(key);
            if (hit != index.end())
                next.push_back(hit->second);  // proposals outside the table are dropped
            else
                next.push_back(any_row(rng));
        }
        population = std::move(next);
        pool.insert(population.begin(), population.end());
    }
    return {pool.begin(), pool.end()};
}

Trace run_bo(const ProblemSpec& problem, const RunConfig& config) {
    if (config.pool_strategy == PoolStrategy::Evolutionary && !config.ga)
        throw std::invalid_argument("run_bo: EVOLUTIONARY pool strategy requires a GaConfig");
    Trace trace;
    trace.budget = config.budget;
    trace.rng_seed = config.rng_seed;
    trace.seed_observations = seed_design(problem, config.n_seed, config.rng_seed);

    std::set<PairKey> observed;
    double incumbent = -std::numeric_limits<double>::infinity();
    double spent = 0.0;
    bool optimum_in_seed = false;
    for (const Observation& o : trace.seed_observations) {
        observed.insert({o.candidate, o.fidelity});
        spent = o.cumulative_cost;
        if (o.fidelity == Fid::High) {
            incumbent = std::max(incumbent, o.value);
            if (o.value == problem.optimum) optimum_in_seed = true;
        }
    }
    if (optimum_in_seed) {
        // the seed batch is charged as a whole before its results are read
        trace.reached_optimum_at = spent;
        trace.stop = StopReason::Optimum;
        return trace;
    }

    std::unordered_map<std::uint64_t, Eigen::Index> index;
    if (config.pool_strategy == PoolStrategy::Evolutionary) index = block_index(problem);

    std::vector<Eigen::Index> exhaustive_pool;
    if (config.pool_strategy == PoolStrategy::Exhaustive) {
        exhaustive_pool.resize(static_cast<std::size_t>(problem.size()));
        for (Eigen::Index i = 0; i < problem.size(); ++i)
            exhaustive_pool[static_cast<std::size_t>(i)] = i;
    }

    std::optional<KernelParams> warm;
    for (int iter = 0; spent < config.budget; ++iter) {
        // SF-EI is a true single-fidelity baseline: HIGH observations only
        std::vector<Observation> train;
        for (const Observation& o : trace.all_observations())
            if (config.acquisition != Acq::SfEi || o.fidelity == Fid::High)
                train.push_back(o);

        FitConfig fit = config.fit;
        fit.warm_start = warm;
        if (config.reduce_restarts_after >= 0 && iter >= config.reduce_restarts_after)
            fit.restarts = 1;
        const bool refit =
            !warm || config.refit_every <= 1 || iter % config.refit_every == 0;
        const GpModel model = [&] {
            try {
                return refit ? GpModel::fit(train, problem, fit, config.rng_seed)
                             : GpModel::build(*warm, train, problem);
            } catch (const std::exception& e) {
                throw std::runtime_error("run_bo: surrogate fit failed at iteration " +
                                         std::to_string(iter) + ": " + e.what());
            }
        }();
        warm = model.params();

        const std::uint64_t iter_seed = mix_seed(config.rng_seed, static_cast<std::uint64_t>(iter));
        auto score_with = [&](const std::vector<Eigen::Index>& pool) {
            switch (config.acquisition) {
                case Acq::SfEi: return sf_ei(model, problem, pool, incumbent);
                case Acq::MfMes:
                    return mf_mes(model, problem, pool, iter_seed, config.mes_fstar);
                case Acq::MfTvr: return mf_tvr(model, problem, pool, incumbent);
                default:
                    return mf_custom(mf_mes(model, problem, pool, iter_seed, config.mes_fstar),
                                     mf_tvr(model, problem, pool, incumbent));
            }
        };

        std::vector<Eigen::Index> pool;
        if (config.pool_strategy == PoolStrategy::Exhaustive) {
            pool = exhaustive_pool;
        } else {
            PoolScoreFn ga_score = [&](const std::vector<Eigen::Index>& cands) {
                const AcqScores s = score_with(cands);
                // per-candidate steering score: best over the scored fidelities
                Eigen::VectorXd best =
                    Eigen::VectorXd::Constant(static_cast<Eigen::Index>(cands.size()),
                                              -std::numeric_limits<double>::infinity());
                for (std::size_t i = 0; i < s.pairs.size(); ++i)
                    for (std::size_t j = 0; j < cands.size(); ++j)
                        if (s.pairs[i].candidate == cands[j])
                            best(static_cast<Eigen::Index>(j)) =
                                std::max(best(static_cast<Eigen::Index>(j)),
                                         s.scores(static_cast<Eigen::Index>(i)));
                return best;
            };
            pool = propose_pool_evolutionary(problem, ga_score, *config.ga,
                                             mix_seed(iter_seed, 0xEA), trace.all_observations(),
                                             index);
        }

        PairKey next{};
        try {
            next = select_next(score_with(pool), observed);
        } catch (const std::runtime_error&) {
            trace.stop = StopReason::Exhausted;
            return trace;
        }

        spent += problem.cost(next.fidelity);
        const double value = problem.value(next.candidate, next.fidelity);
        trace.step_observations.push_back({next.candidate, next.fidelity, value, spent});
        observed.insert(next);
        if (next.fidelity == Fid::High) {
            incumbent = std::max(incumbent, value);
            if (value == problem.optimum) {
                trace.reached_optimum_at = spent;
                trace.stop = StopReason::Optimum;
                return trace;
            }
        }
    }
    trace.stop = StopReason::Budget;
    return trace;
}

}  // namespace mfbo

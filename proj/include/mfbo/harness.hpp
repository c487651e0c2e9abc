#ifndef MFBO_HARNESS_HPP
#define MFBO_HARNESS_HPP

#include <filesystem>

#include "mfbo/engine.hpp"
#include "mfbo/metrics.hpp"
#include "mfbo/problems.hpp"

namespace mfbo {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Resolved experiment description. Presets carry their published defaults;
/// every optional field can be overridden by flags or a JSON config file.
struct ExperimentConfig {
    std::string preset;              // rkhs | hartmann6 | cof | oligomer
    std::filesystem::path data_path; // explicit dataset instead of a preset
    std::vector<Acq> acquisitions{Acq::MfMes};
    int n_repeats = 5;
    std::optional<double> budget;
    std::optional<int> n_seed;
    std::optional<double> cost_low;
    std::optional<double> target_corr;  // synthetic presets only
    std::uint64_t base_seed = 0;
    std::filesystem::path out_dir = ".";
    bool recompute_target = false;
    double cap = 60.0;  // capped budget-to-optimum score
};

/// Merges a JSON config file into cfg (fields present in the file win over
/// defaults; flag handling in the CLI applies on top).
void load_config_json(ExperimentConfig& cfg, const std::filesystem::path& path);

struct ResolvedExperiment {
    ProblemSpec problem;
    double budget;
    int n_seed;
    PoolStrategy pool_strategy;
    std::optional<GaConfig> ga;
    int reduce_restarts_after;
    int refit_every;
};

/// Builds the problem and the per-preset run defaults.
ResolvedExperiment resolve(const ExperimentConfig& cfg);

RunConfig make_run_config(const ResolvedExperiment& exp, Acq acq, std::uint64_t rng_seed);

/// Single run: writes trace.csv and trace.svg under cfg.out_dir.
void cmd_run(const ExperimentConfig& cfg);

/// Repeated runs per acquisition: writes compare.csv/compare.svg and
/// crhf.csv/crhf.svg under cfg.out_dir.
void cmd_compare(const ExperimentConfig& cfg);

/// Cost x correlation sweep on a synthetic preset: writes sweep.csv and one
/// heatmap_<acq>.svg per multi-fidelity acquisition.
void cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& corr_grid,
               const std::vector<double>& cost_grid);

// --- CSV plumbing (exposed for the round-trip tests) -----------------------

void write_trace_csv(const Trace& trace, const std::filesystem::path& path);
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

/// Default sweep grids.
std::vector<double> default_corr_grid();
std::vector<double> default_cost_grid();

}  // namespace mfbo

#endif

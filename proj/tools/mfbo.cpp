#include <CLI11.hpp>
#include <iostream>

#include "mfbo/harness.hpp"

namespace {

void add_common(CLI::App* sub, mfbo::ExperimentConfig& cfg, std::string& config_path,
                std::vector<std::string>& acq_names) {
    sub->add_option("--preset", cfg.preset, "problem preset: rkhs|hartmann6|cof|oligomer");
    sub->add_option("--data", cfg.data_path, "tabular dataset CSV path");
    sub->add_option("--acq", acq_names, "acquisition: sf-ei|mf-mes|mf-tvr|mf-custom");
    sub->add_option("--budget", [&cfg](const std::vector<std::string>& v) {
        cfg.budget = std::stod(v.front());
        return true;
    }, "evaluation budget (HIGH costs 1)");
    sub->add_option("--seeds", [&cfg](const std::vector<std::string>& v) {
        cfg.n_seed = std::stoi(v.front());
        return true;
    }, "number of seed candidates");
    sub->add_option("--repeats", cfg.n_repeats, "repeats per acquisition");
    sub->add_option("--cost-low", [&cfg](const std::vector<std::string>& v) {
        cfg.cost_low = std::stod(v.front());
        return true;
    }, "relative cost of a LOW evaluation");
    sub->add_option("--corr", [&cfg](const std::vector<std::string>& v) {
        cfg.target_corr = std::stod(v.front());
        return true;
    }, "target LOW/HIGH correlation (synthetic presets)");
    sub->add_option("--base-seed", cfg.base_seed, "base RNG seed");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--config", config_path, "JSON config file (flags win)");
    sub->add_flag("--recompute-target", cfg.recompute_target,
                  "recompute y_high via the combined target from property columns");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mfbo: discrete-domain multi-fidelity Bayesian optimization harness"};
    app.require_subcommand(1);

    mfbo::ExperimentConfig cfg;
    cfg.acquisitions.clear();
    std::string config_path;
    std::vector<std::string> acq_names;
    std::vector<double> corr_grid, cost_grid;

    CLI::App* run = app.add_subcommand("run", "single optimization run (trace.csv/svg)");
    add_common(run, cfg, config_path, acq_names);
    CLI::App* compare =
        app.add_subcommand("compare", "repeated runs per acquisition (compare/crhf csv+svg)");
    add_common(compare, cfg, config_path, acq_names);
    CLI::App* sweep =
        app.add_subcommand("sweep", "cost x correlation sweep (sweep.csv, heatmaps)");
    add_common(sweep, cfg, config_path, acq_names);
    sweep->add_option("--corr-grid", corr_grid, "correlation grid values");
    sweep->add_option("--cost-grid", cost_grid, "cost grid values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    try {
        if (!config_path.empty()) {
            mfbo::ExperimentConfig from_file;
            from_file.acquisitions.clear();
            mfbo::load_config_json(from_file, config_path);
            // flags win over file values
            if (cfg.preset.empty()) cfg.preset = from_file.preset;
            if (cfg.data_path.empty()) cfg.data_path = from_file.data_path;
            if (acq_names.empty()) cfg.acquisitions = from_file.acquisitions;
            if (compare->count("--repeats") == 0 && run->count("--repeats") == 0 &&
                sweep->count("--repeats") == 0)
                cfg.n_repeats = from_file.n_repeats != 5 ? from_file.n_repeats : cfg.n_repeats;
            if (!cfg.budget) cfg.budget = from_file.budget;
            if (!cfg.n_seed) cfg.n_seed = from_file.n_seed;
            if (!cfg.cost_low) cfg.cost_low = from_file.cost_low;
            if (!cfg.target_corr) cfg.target_corr = from_file.target_corr;
            if (cfg.base_seed == 0) cfg.base_seed = from_file.base_seed;
            if (cfg.out_dir == ".") cfg.out_dir = from_file.out_dir;
            cfg.recompute_target = cfg.recompute_target || from_file.recompute_target;
        }
        for (const std::string& name : acq_names)
            cfg.acquisitions.push_back(mfbo::acq_from_string(name));
        if (cfg.acquisitions.empty()) cfg.acquisitions = {mfbo::Acq::MfMes};

        if (*run) {
            mfbo::cmd_run(cfg);
        } else if (*compare) {
            mfbo::cmd_compare(cfg);
        } else {
            if (corr_grid.empty()) corr_grid = mfbo::default_corr_grid();
            if (cost_grid.empty()) cost_grid = mfbo::default_cost_grid();
            mfbo::cmd_sweep(cfg, corr_grid, cost_grid);
        }
    } catch (const mfbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const mfbo::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mfbo/harness.hpp"

using namespace mfbo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mfbo_harness_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig quick_rkhs(const fs::path& out) {
    ExperimentConfig cfg;
    cfg.preset = "rkhs";
    cfg.budget = 8.0;
    cfg.n_seed = 4;
    cfg.out_dir = out;
    return cfg;
}

}  // namespace

TEST_CASE("trace csv round trip preserves every value exactly") {
    Trace t;
    t.seed_observations.push_back({7, Fid::High, 1.0 / 3.0, 1.0});
    t.seed_observations.push_back({7, Fid::Low, -2.718281828459045, 1.1});
    t.step_observations.push_back({42, Fid::Low, 1e-17, 1.2});
    t.step_observations.push_back({3, Fid::High, 12345.6789012345678, 2.2});
    TempDir tmp;
    const fs::path f = tmp.path / "trace.csv";
    write_trace_csv(t, f);
    const auto rows = read_csv(f);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"step", "candidate", "fidelity", "value",
                                              "cumulative_cost"});
    CHECK(rows[1][0] == "0");
    CHECK(rows[2][0] == "0");
    CHECK(rows[3][0] == "1");
    CHECK(rows[4][0] == "2");
    CHECK(rows[2][2] == "low");
    const auto all = t.all_observations();
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(std::stoll(rows[i + 1][1]) == all[i].candidate);
        CHECK(std::stod(rows[i + 1][3]) == all[i].value);
        CHECK(std::stod(rows[i + 1][4]) == all[i].cumulative_cost);
    }
    CHECK_THROWS_AS(read_csv(tmp.path / "absent.csv"), DataError);
}

TEST_CASE("resolve applies preset defaults and overrides") {
    ExperimentConfig cfg;
    cfg.preset = "rkhs";
    ResolvedExperiment exp = resolve(cfg);
    CHECK(exp.problem.size() == 500);
    CHECK(exp.problem.cost_low == 0.1);
    CHECK(exp.budget == 50.0);
    CHECK(exp.n_seed == 5);
    CHECK(exp.pool_strategy == PoolStrategy::Exhaustive);

    cfg.budget = 12.0;
    cfg.n_seed = 3;
    cfg.cost_low = 0.25;
    exp = resolve(cfg);
    CHECK(exp.budget == 12.0);
    CHECK(exp.n_seed == 3);
    CHECK(exp.problem.cost_low == 0.25);

    ExperimentConfig cof;
    cof.preset = "cof";
    exp = resolve(cof);
    CHECK(std::isinf(exp.budget));
    CHECK(exp.n_seed == 3);
    CHECK(exp.problem.size() == 608);

    ExperimentConfig h6;
    h6.preset = "hartmann6";
    exp = resolve(h6);
    CHECK(exp.problem.size() == 501);
    CHECK(exp.problem.dim() == 6);

    ExperimentConfig bad;
    bad.preset = "nope";
    CHECK_THROWS_AS(resolve(bad), ConfigError);
    CHECK_THROWS_AS(resolve(ExperimentConfig{}), ConfigError);

    ExperimentConfig missing;
    missing.data_path = "/nonexistent/table.csv";
    CHECK_THROWS_AS(resolve(missing), DataError);
}

TEST_CASE("resolve switches huge tables to the evolutionary proposer") {
    ExperimentConfig cfg;
    cfg.preset = "oligomer";
    const ResolvedExperiment exp = resolve(cfg);
    CHECK(exp.n_seed == 25);
    CHECK(exp.pool_strategy == PoolStrategy::Evolutionary);
    REQUIRE(exp.ga.has_value());
    CHECK(exp.ga->block_arity == 6);
    CHECK(exp.reduce_restarts_after == 5);
    CHECK(exp.problem.size() == 44928);
}

TEST_CASE("json config loads fields and reports errors as config errors") {
    TempDir tmp;
    const fs::path f = tmp.path / "cfg.json";
    {
        std::ofstream out(f);
        out << R"({"preset":"rkhs","acquisitions":["mf-tvr","sf-ei"],"repeats":3,)"
            << R"("budget":20,"seeds":4,"cost_low":0.05,"corr":0.9,"base_seed":11,)"
            << R"("out":"somewhere"})";
    }
    ExperimentConfig cfg;
    load_config_json(cfg, f);
    CHECK(cfg.preset == "rkhs");
    REQUIRE(cfg.acquisitions.size() == 2);
    CHECK(cfg.acquisitions[0] == Acq::MfTvr);
    CHECK(cfg.n_repeats == 3);
    CHECK(cfg.budget == 20.0);
    CHECK(cfg.n_seed == 4);
    CHECK(cfg.cost_low == 0.05);
    CHECK(cfg.target_corr == 0.9);
    CHECK(cfg.base_seed == 11);
    CHECK(cfg.out_dir == fs::path("somewhere"));

    {
        std::ofstream out(f);
        out << "{not json";
    }
    CHECK_THROWS_AS(load_config_json(cfg, f), ConfigError);
    {
        std::ofstream out(f);
        out << R"({"acquisitions":["warp-drive"]})";
    }
    CHECK_THROWS_AS(load_config_json(cfg, f), ConfigError);
    CHECK_THROWS_AS(load_config_json(cfg, tmp.path / "absent.json"), ConfigError);
}

TEST_CASE("cmd_run writes a deterministic trace under the output directory") {
    TempDir tmp;
    ExperimentConfig cfg = quick_rkhs(tmp.path / "a");
    cmd_run(cfg);
    REQUIRE(fs::exists(cfg.out_dir / "trace.csv"));
    REQUIRE(fs::exists(cfg.out_dir / "trace.svg"));

    const auto rows = read_csv(cfg.out_dir / "trace.csv");
    REQUIRE(rows.size() > 1);
    // budget contract: the ledger never exceeds budget by more than one step
    const double last = std::stod(rows.back()[4]);
    CHECK(last <= 8.0 + 1.0 + 1e-12);

    ExperimentConfig again = quick_rkhs(tmp.path / "b");
    cmd_run(again);
    CHECK(slurp(cfg.out_dir / "trace.csv") == slurp(again.out_dir / "trace.csv"));
    CHECK(slurp(cfg.out_dir / "trace.svg") == slurp(again.out_dir / "trace.svg"));

    ExperimentConfig other = quick_rkhs(tmp.path / "c");
    other.base_seed = 1;
    cmd_run(other);
    CHECK(slurp(cfg.out_dir / "trace.csv") != slurp(other.out_dir / "trace.csv"));

    ExperimentConfig no_acq = quick_rkhs(tmp.path / "d");
    no_acq.acquisitions.clear();
    CHECK_THROWS_AS(cmd_run(no_acq), ConfigError);
}

TEST_CASE("cmd_compare emits per-repeat summaries and crhf series") {
    TempDir tmp;
    ExperimentConfig cfg = quick_rkhs(tmp.path);
    cfg.n_repeats = 2;
    CHECK_THROWS_AS(cmd_compare(cfg), ConfigError);  // one acquisition only
    cfg.acquisitions = {Acq::MfMes, Acq::SfEi};
    cmd_compare(cfg);
    for (const char* name : {"compare.csv", "compare.svg", "crhf.csv", "crhf.svg"})
        REQUIRE(fs::exists(tmp.path / name));

    const auto rows = read_csv(tmp.path / "compare.csv");
    REQUIRE(rows.size() > 1);
    CHECK(rows[0][0] == "acquisition");
    std::set<std::pair<std::string, std::string>> runs;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        runs.insert({rows[i][0], rows[i][1]});
        // budget_to_optimum is constant within a run and capped
        CHECK(std::stod(rows[i][2]) <= cfg.cap);
    }
    CHECK(runs.size() == 4);  // 2 acquisitions x 2 repeats

    const auto crhf_rows = read_csv(tmp.path / "crhf.csv");
    REQUIRE(crhf_rows.size() > 1);
    double prev = 0.0;
    for (std::size_t i = 1; i < crhf_rows.size(); ++i) {
        const double term = std::stod(crhf_rows[i][3]);
        const double running = std::stod(crhf_rows[i][4]);
        CHECK(term >= 0.0);
        if (crhf_rows[i][2] != "0") CHECK(running >= prev - 1e-12);
        prev = running;
    }
}

TEST_CASE("cmd_sweep rejects non-synthetic presets and writes consistent cells") {
    TempDir tmp;
    ExperimentConfig cfg = quick_rkhs(tmp.path);
    cfg.n_repeats = 1;
    cfg.acquisitions = {Acq::MfTvr};

    ExperimentConfig cof = cfg;
    cof.preset = "cof";
    CHECK_THROWS_AS(cmd_sweep(cof, {0.9}, {0.1}), ConfigError);
    CHECK_THROWS_AS(cmd_sweep(cfg, {}, {0.1}), ConfigError);
    ExperimentConfig sf_only = cfg;
    sf_only.acquisitions = {Acq::SfEi};
    CHECK_THROWS_AS(cmd_sweep(sf_only, {0.9}, {0.1}), ConfigError);

    cmd_sweep(cfg, {0.8, 0.95}, {0.1});
    REQUIRE(fs::exists(tmp.path / "sweep.csv"));
    REQUIRE(fs::exists(tmp.path / "heatmap_mf-tvr.svg"));
    const auto rows = read_csv(tmp.path / "sweep.csv");
    REQUIRE(rows.size() == 3);  // header + 2 corr x 1 cost
    CHECK(rows[0] == std::vector<std::string>{"acquisition", "corr", "cost", "mean_mf",
                                              "sf_baseline", "relative_improvement"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i][0] == "mf-tvr");
        const double mean_mf = std::stod(rows[i][3]);
        const double sf = std::stod(rows[i][4]);
        const double ri = std::stod(rows[i][5]);
        CHECK(ri == doctest::Approx(mean_mf / sf).epsilon(1e-12));
    }
}

#ifdef MFBO_CLI_PATH
TEST_CASE("the command-line binary maps failures to exit codes") {
    TempDir tmp;
    const std::string cli = MFBO_CLI_PATH;
    auto run = [&](const std::string& args) {
        const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    CHECK(run("run --preset nope --out " + (tmp.path / "x").string()) == 1);
    CHECK(run("run --data /nonexistent.csv --out " + (tmp.path / "x").string()) == 2);
    CHECK(run("run") == 1);
    CHECK(run("run --preset rkhs --budget 6 --seeds 3 --acq sf-ei --out " +
              (tmp.path / "ok").string()) == 0);
    CHECK(fs::exists(tmp.path / "ok" / "trace.csv"));
}
#endif

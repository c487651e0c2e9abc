#include "mfbo/harness.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

namespace mfbo {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file " + path.string());
    return out;
}

// --- tiny SVG writer -------------------------------------------------------

struct Svg {
    std::ostringstream body;
    double width, height;

    Svg(double w, double h) : width(w), height(h) {}

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              bool dashed = false, double sw = 1.0) {
        body << "<line x1=\"" << fmt2(x1) << "\" y1=\"" << fmt2(y1) << "\" x2=\""
             << fmt2(x2) << "\" y2=\"" << fmt2(y2) << "\" stroke=\"" << color
             << "\" stroke-width=\"" << fmt2(sw) << "\"";
        if (dashed) body << " stroke-dasharray=\"6,4\"";
        body << "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& color) {
        body << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts) body << fmt2(x) << "," << fmt2(y) << " ";
        body << "\"/>\n";
    }

    void circle(double x, double y, double r, const std::string& color) {
        body << "<circle cx=\"" << fmt2(x) << "\" cy=\"" << fmt2(y) << "\" r=\"" << fmt2(r)
             << "\" fill=\"" << color << "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill) {
        body << "<rect x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" width=\"" << fmt2(w)
             << "\" height=\"" << fmt2(h) << "\" fill=\"" << fill
             << "\" stroke=\"#888\" stroke-width=\"0.5\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 11,
              const std::string& color = "#222") {
        body << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(y) << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\" fill=\"" << color << "\">" << s << "</text>\n";
    }

    void save(const std::filesystem::path& path) const {
        auto out = open_out(path);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
            << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
            << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body.str() << "</svg>\n";
    }
};

const char* acq_color(Acq a) {
    switch (a) {
        case Acq::SfEi: return "#d62728";
        case Acq::MfMes: return "#1f77b4";
        case Acq::MfTvr: return "#2ca02c";
        default: return "#9467bd";
    }
}

// Axis mapping helper: data range -> pixel range with margins.
struct Scale {
    double d0, d1, p0, p1;
    double operator()(double v) const {
        const double t = d1 > d0 ? (v - d0) / (d1 - d0) : 0.5;
        return p0 + t * (p1 - p0);
    }
};

struct RunRecord {
    Acq acq;
    int repeat;
    Trace trace;
    double bto;
};

// best-so-far HIGH value after each observation
std::vector<std::pair<double, double>> best_so_far(const Trace& t) {
    std::vector<std::pair<double, double>> out;
    double best = -std::numeric_limits<double>::infinity();
    for (const Observation& o : t.all_observations()) {
        if (o.fidelity == Fid::High) best = std::max(best, o.value);
        out.emplace_back(o.cumulative_cost, best);
    }
    return out;
}

}  // namespace

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "step,candidate,fidelity,value,cumulative_cost\n";
    for (const Observation& o : trace.seed_observations)
        out << "0," << o.candidate << "," << to_string(o.fidelity) << "," << fmt(o.value)
            << "," << fmt(o.cumulative_cost) << "\n";
    int step = 1;
    for (const Observation& o : trace.step_observations)
        out << step++ << "," << o.candidate << "," << to_string(o.fidelity) << ","
            << fmt(o.value) << "," << fmt(o.cumulative_cost) << "\n";
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string f;
        std::stringstream ss(line);
        while (std::getline(ss, f, ',')) fields.push_back(f);
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::vector<double> default_corr_grid() { return {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99}; }
std::vector<double> default_cost_grid() { return {0.01, 0.05, 0.1, 0.2, 0.5}; }

void load_config_json(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    try {
        if (j.contains("preset")) cfg.preset = j["preset"].get<std::string>();
        if (j.contains("data")) cfg.data_path = j["data"].get<std::string>();
        if (j.contains("acquisitions")) {
            cfg.acquisitions.clear();
            for (const auto& a : j["acquisitions"])
                cfg.acquisitions.push_back(acq_from_string(a.get<std::string>()));
        }
        if (j.contains("repeats")) cfg.n_repeats = j["repeats"].get<int>();
        if (j.contains("budget")) cfg.budget = j["budget"].get<double>();
        if (j.contains("seeds")) cfg.n_seed = j["seeds"].get<int>();
        if (j.contains("cost_low")) cfg.cost_low = j["cost_low"].get<double>();
        if (j.contains("corr")) cfg.target_corr = j["corr"].get<double>();
        if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();
        if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
        if (j.contains("recompute_target")) cfg.recompute_target = j["recompute_target"].get<bool>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("config field error in " + path.string() + ": " + e.what());
    }
}

ResolvedExperiment resolve(const ExperimentConfig& cfg) {
    ResolvedExperiment exp;
    exp.pool_strategy = PoolStrategy::Exhaustive;
    exp.reduce_restarts_after = -1;
    exp.refit_every = 1;
    double budget = 50.0;
    int n_seed = 5;

    if (!cfg.data_path.empty()) {
        try {
            exp.problem = load_tabular_problem(cfg.data_path, cfg.cost_low.value_or(0.1),
                                               cfg.recompute_target);
        } catch (const std::exception& e) {
            throw DataError(e.what());
        }
        if (exp.problem.size() > 10000) {
            exp.pool_strategy = PoolStrategy::Evolutionary;
            exp.ga = GaConfig{static_cast<int>(exp.problem.blocks.cols()), 128, 8, 0.1, 0.25};
            exp.reduce_restarts_after = 5;
            exp.refit_every = 5;
        }
    } else if (cfg.preset == "rkhs") {
        exp.problem = rkhs_problem(cfg.cost_low.value_or(0.1),
                                   {cfg.target_corr.value_or(0.88), cfg.base_seed});
    } else if (cfg.preset == "hartmann6") {
        exp.problem = hartmann6_problem(500, cfg.cost_low.value_or(0.1),
                                        {cfg.target_corr.value_or(0.76), cfg.base_seed},
                                        cfg.base_seed + 6);
    } else if (cfg.preset == "cof") {
        exp.problem = cof_problem(cfg.cost_low.value_or(0.2));
        budget = std::numeric_limits<double>::infinity();
        n_seed = 3;
        // open-ended runs: the model is re-conditioned between periodic refits
        exp.reduce_restarts_after = 10;
        exp.refit_every = 5;
    } else if (cfg.preset == "oligomer") {
        exp.problem = oligomer_problem(44928, cfg.cost_low.value_or(0.1));
        n_seed = 25;
        exp.pool_strategy = PoolStrategy::Evolutionary;
        exp.ga = GaConfig{6, 128, 8, 0.1, 0.25};
        exp.reduce_restarts_after = 5;
        exp.refit_every = 5;
    } else if (cfg.preset.empty()) {
        throw ConfigError("either --preset or --data is required");
    } else {
        throw ConfigError("unknown preset '" + cfg.preset +
                          "' (expected rkhs|hartmann6|cof|oligomer)");
    }
    exp.budget = cfg.budget.value_or(budget);
    exp.n_seed = cfg.n_seed.value_or(n_seed);
    return exp;
}

RunConfig make_run_config(const ResolvedExperiment& exp, Acq acq, std::uint64_t rng_seed) {
    RunConfig rc;
    rc.n_seed = exp.n_seed;
    rc.budget = exp.budget;
    rc.acquisition = acq;
    rc.rng_seed = rng_seed;
    rc.pool_strategy = exp.pool_strategy;
    rc.ga = exp.ga;
    rc.reduce_restarts_after = exp.reduce_restarts_after;
    rc.refit_every = exp.refit_every;
    return rc;
}

void cmd_run(const ExperimentConfig& cfg) {
    const ResolvedExperiment exp = resolve(cfg);
    if (cfg.acquisitions.empty()) throw ConfigError("run: at least one --acq is required");
    const Acq acq = cfg.acquisitions.front();
    std::filesystem::create_directories(cfg.out_dir);
    const Trace trace = run_bo(exp.problem, make_run_config(exp, acq, cfg.base_seed));
    write_trace_csv(trace, cfg.out_dir / "trace.csv");

    // value vs cumulative cost, dashed lines at domain and obtained optimum
    const auto all = trace.all_observations();
    double max_cost = trace.spent();
    double lo = exp.problem.y_high.minCoeff(), hi = exp.problem.optimum;
    Svg svg(640, 420);
    const Scale sx{0.0, std::max(max_cost, 1e-9), 60, 610};
    const Scale sy{lo, hi + 0.05 * (hi - lo + 1e-9), 390, 20};
    svg.line(60, 390, 610, 390, "#222");
    svg.line(60, 390, 60, 20, "#222");
    svg.text(280, 412, "cumulative cost");
    svg.text(8, 16, exp.problem.name + " / " + to_string(acq));
    svg.line(sx(0.0), sy(exp.problem.optimum), sx(max_cost), sy(exp.problem.optimum),
             "#555", true);
    double best = -std::numeric_limits<double>::infinity();
    for (const Observation& o : all)
        if (o.fidelity == Fid::High) best = std::max(best, o.value);
    svg.line(sx(0.0), sy(best), sx(max_cost), sy(best), "#999", true);
    std::vector<std::pair<double, double>> pts;
    for (const Observation& o : all) {
        const double x = sx(o.cumulative_cost), y = sy(o.value);
        pts.emplace_back(x, y);
        svg.circle(x, y, 2.5, o.fidelity == Fid::High ? "#1f77b4" : "#ff7f0e");
    }
    svg.polyline(pts, "#bbb");
    svg.save(cfg.out_dir / "trace.svg");
}

void cmd_compare(const ExperimentConfig& cfg) {
    if (cfg.acquisitions.size() < 2)
        throw ConfigError("compare: at least two --acq values are required");
    const ResolvedExperiment exp = resolve(cfg);
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<RunRecord> records;
    for (Acq acq : cfg.acquisitions)
        for (int r = 0; r < cfg.n_repeats; ++r) {
            RunRecord rec;
            rec.acq = acq;
            rec.repeat = r;
            rec.trace =
                run_bo(exp.problem, make_run_config(exp, acq, cfg.base_seed + static_cast<std::uint64_t>(r)));
            rec.bto = budget_to_optimum(rec.trace, cfg.cap);
            records.push_back(std::move(rec));
        }

    {
        auto out = open_out(cfg.out_dir / "compare.csv");
        out << "acquisition,repeat,budget_to_optimum,cumulative_cost,best_so_far\n";
        for (const RunRecord& rec : records)
            for (const auto& [cost, best] : best_so_far(rec.trace))
                out << to_string(rec.acq) << "," << rec.repeat << "," << fmt(rec.bto) << ","
                    << fmt(cost) << "," << fmt(best) << "\n";
    }
    {
        auto out = open_out(cfg.out_dir / "crhf.csv");
        out << "acquisition,repeat,interval,term,running_total\n";
        for (const RunRecord& rec : records) {
            const CrhfResult r = crhf(rec.trace, exp.problem.optimum);
            double running = 0.0;
            for (const auto& [i, term] : r.series) {
                running += term;
                out << to_string(rec.acq) << "," << rec.repeat << "," << i << "," << fmt(term)
                    << "," << fmt(running) << "\n";
            }
        }
    }

    // compare.svg: mean best-so-far vs budget per acquisition
    double max_cost = 1e-9;
    for (const RunRecord& rec : records) max_cost = std::max(max_cost, rec.trace.spent());
    const double lo = exp.problem.y_high.minCoeff(), hi = exp.problem.optimum;
    Svg svg(640, 420);
    const Scale sx{0.0, max_cost, 60, 610};
    const Scale sy{lo, hi + 0.05 * (hi - lo + 1e-9), 390, 20};
    svg.line(60, 390, 610, 390, "#222");
    svg.line(60, 390, 60, 20, "#222");
    svg.text(280, 412, "cumulative cost");
    svg.line(sx(0.0), sy(hi), sx(max_cost), sy(hi), "#555", true);
    int legend_y = 20;
    for (Acq acq : cfg.acquisitions) {
        std::vector<std::pair<double, double>> pts;
        for (int g = 0; g <= 100; ++g) {
            const double c = max_cost * g / 100.0;
            double sum = 0.0;
            int cnt = 0;
            for (const RunRecord& rec : records) {
                if (rec.acq != acq) continue;
                double best = lo;
                for (const auto& [cost, b] : best_so_far(rec.trace))
                    if (cost <= c) best = b;
                sum += best;
                ++cnt;
            }
            if (cnt > 0) pts.emplace_back(sx(c), sy(sum / cnt));
        }
        svg.polyline(pts, acq_color(acq));
        svg.text(520, legend_y += 16, to_string(acq), 11, acq_color(acq));
    }
    svg.save(cfg.out_dir / "compare.svg");

    // crhf.svg: mean running CRHF total vs interval per acquisition
    int max_interval = 1;
    for (const RunRecord& rec : records)
        max_interval =
            std::max(max_interval, static_cast<int>(rec.trace.step_observations.size()));
    double max_total = 1e-9;
    std::map<Acq, std::vector<std::pair<double, double>>> curves;
    for (Acq acq : cfg.acquisitions) {
        std::vector<double> sums(static_cast<std::size_t>(max_interval) + 1, 0.0);
        std::vector<int> counts(sums.size(), 0);
        for (const RunRecord& rec : records) {
            if (rec.acq != acq) continue;
            const CrhfResult r = crhf(rec.trace, exp.problem.optimum);
            double running = 0.0;
            for (const auto& [i, term] : r.series) {
                running += term;
                sums[static_cast<std::size_t>(i)] += running;
                counts[static_cast<std::size_t>(i)] += 1;
            }
            // runs that stopped early hold their final total
            if (!r.series.empty())
                for (int i = r.series.back().first + 1; i <= max_interval; ++i) {
                    sums[static_cast<std::size_t>(i)] += running;
                    counts[static_cast<std::size_t>(i)] += 1;
                }
        }
        std::vector<std::pair<double, double>> curve;
        for (std::size_t i = 0; i < sums.size(); ++i)
            if (counts[i] > 0) {
                curve.emplace_back(static_cast<double>(i), sums[i] / counts[i]);
                max_total = std::max(max_total, curve.back().second);
            }
        curves[acq] = std::move(curve);
    }
    Svg csvg(640, 420);
    const Scale cx{0.0, static_cast<double>(max_interval), 60, 610};
    const Scale cy{0.0, max_total * 1.05, 390, 20};
    csvg.line(60, 390, 610, 390, "#222");
    csvg.line(60, 390, 60, 20, "#222");
    csvg.text(260, 412, "interval (acquisition step)");
    legend_y = 20;
    for (Acq acq : cfg.acquisitions) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [i, v] : curves[acq]) pts.emplace_back(cx(i), cy(v));
        csvg.polyline(pts, acq_color(acq));
        csvg.text(520, legend_y += 16, to_string(acq), 11, acq_color(acq));
    }
    csvg.save(cfg.out_dir / "crhf.svg");
}

void cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& corr_grid,
               const std::vector<double>& cost_grid) {
    if (cfg.preset != "rkhs" && cfg.preset != "hartmann6")
        throw ConfigError("sweep: requires a synthetic preset (rkhs or hartmann6)");
    if (corr_grid.empty() || cost_grid.empty())
        throw ConfigError("sweep: correlation and cost grids must be nonempty");
    std::vector<Acq> mf_acqs;
    for (Acq a : cfg.acquisitions)
        if (a != Acq::SfEi) mf_acqs.push_back(a);
    if (mf_acqs.empty()) throw ConfigError("sweep: need at least one multi-fidelity --acq");
    std::filesystem::create_directories(cfg.out_dir);

    struct Cell {
        double corr, cost, mean_mf, sf_baseline, ri;
    };
    std::map<Acq, std::vector<Cell>> cells;

    for (double corr : corr_grid) {
        for (double cost : cost_grid) {
            ExperimentConfig cell_cfg = cfg;
            cell_cfg.target_corr = corr;
            cell_cfg.cost_low = cost;
            const ResolvedExperiment exp = resolve(cell_cfg);

            auto cell_run = [&](Acq acq, int r) {
                RunConfig rc = make_run_config(
                    exp, acq, cfg.base_seed + static_cast<std::uint64_t>(r));
                // sweep cells trade fit polish for throughput
                rc.refit_every = std::max(rc.refit_every, 5);
                if (rc.reduce_restarts_after < 0) rc.reduce_restarts_after = 3;
                rc.fit.max_iterations = std::min(rc.fit.max_iterations, 60);
                return budget_to_optimum(run_bo(exp.problem, rc), cfg.cap);
            };

            double sf_sum = 0.0;
            for (int r = 0; r < cfg.n_repeats; ++r) sf_sum += cell_run(Acq::SfEi, r);
            const double sf_baseline = sf_sum / cfg.n_repeats;

            for (Acq acq : mf_acqs) {
                std::vector<double> scores;
                for (int r = 0; r < cfg.n_repeats; ++r)
                    scores.push_back(cell_run(acq, r));
                const double ri = relative_improvement(scores, sf_baseline);
                double mean_mf = 0.0;
                for (double s : scores) mean_mf += s;
                mean_mf /= scores.size();
                cells[acq].push_back({corr, cost, mean_mf, sf_baseline, ri});
            }
        }
    }

    {
        auto out = open_out(cfg.out_dir / "sweep.csv");
        out << "acquisition,corr,cost,mean_mf,sf_baseline,relative_improvement\n";
        for (Acq acq : mf_acqs)
            for (const Cell& c : cells[acq])
                out << to_string(acq) << "," << fmt(c.corr) << "," << fmt(c.cost) << ","
                    << fmt(c.mean_mf) << "," << fmt(c.sf_baseline) << "," << fmt(c.ri) << "\n";
    }

    for (Acq acq : mf_acqs) {
        const double w = 90, h = 60, x0 = 90, y0 = 40;
        Svg svg(x0 + w * cost_grid.size() + 40, y0 + h * corr_grid.size() + 60);
        svg.text(8, 20, std::string("relative improvement, ") + to_string(acq) + ", " +
                            cfg.preset);
        for (std::size_t i = 0; i < corr_grid.size(); ++i)
            svg.text(14, y0 + h * i + h / 2, "corr " + fmt2(corr_grid[i]));
        for (std::size_t j = 0; j < cost_grid.size(); ++j)
            svg.text(x0 + w * j + 16, y0 + h * corr_grid.size() + 24,
                     "cost " + fmt2(cost_grid[j]));
        for (const Cell& c : cells[acq]) {
            std::size_t i = 0, j = 0;
            for (; i < corr_grid.size(); ++i)
                if (corr_grid[i] == c.corr) break;
            for (; j < cost_grid.size(); ++j)
                if (cost_grid[j] == c.cost) break;
            // diverging color around RI = 1: blue favors MF, red favors SF
            const double t = std::clamp((c.ri - 1.0) / 1.0, -1.0, 1.0);
            const int rch = t > 0 ? 255 : static_cast<int>(255 * (1.0 + t));
            const int bch = t < 0 ? 255 : static_cast<int>(255 * (1.0 - t));
            const int gch = static_cast<int>(255 * (1.0 - std::abs(t)));
            char color[16];
            std::snprintf(color, sizeof color, "#%02x%02x%02x", rch, gch, bch);
            svg.rect(x0 + w * j, y0 + h * i, w, h, color);
            svg.text(x0 + w * j + 14, y0 + h * i + h / 2 + 4, fmt2(c.ri));
        }
        svg.save(cfg.out_dir / (std::string("heatmap_") + to_string(acq) + ".svg"));
    }
}

}  // namespace mfbo

#include "mfbo/problems.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

namespace mfbo {

namespace {

void validate_noise(const NoiseSpec& noise) {
    if (!(noise.target_corr > 0.0 && noise.target_corr <= 1.0))
        throw std::invalid_argument("NoiseSpec: target_corr must lie in (0, 1], got " +
                                    std::to_string(noise.target_corr));
}

// RBF mixture in the spirit of the RKHS benchmark function
// (Assael et al., bo-benchmark-rkhs). The constants are local to this
// project: broad bumps at lengthscale 0.1 and narrow ones at 0.012, with a
// single sharp global peak near x = 0.89.
constexpr double kRkhsBroadCenters[] = {0.08, 0.25, 0.45, 0.65, 0.82};
constexpr double kRkhsBroadWeights[] = {1.5, -2.0, 3.0, -1.5, 1.0};
constexpr double kRkhsBroadLs = 0.1;
constexpr double kRkhsSharpCenters[] = {0.89, 0.15, 0.55};
constexpr double kRkhsSharpWeights[] = {4.0, 1.5, 2.0};
constexpr double kRkhsSharpLs = 0.012;

double rbf(double x, double c, double ls) {
    const double z = (x - c) / ls;
    return std::exp(-0.5 * z * z);
}

// 6D Hartmann constants (standard published values).
const double kHartAlpha[4] = {1.0, 1.2, 3.0, 3.2};
const double kHartA[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                             {0.05, 10, 17, 0.1, 8, 14},
                             {3, 3.5, 1.7, 10, 17, 8},
                             {17, 8, 0.05, 10, 0.1, 14}};
const double kHartP[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                             {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                             {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                             {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto a = field.find_first_not_of(" \t\r");
        const auto b = field.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, std::size_t row, const std::string& col) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("tabular load: row " + std::to_string(row) +
                                 ": cannot parse '" + s + "' in column " + col);
    }
    if (pos != s.size() || !std::isfinite(v))
        throw std::runtime_error("tabular load: row " + std::to_string(row) +
                                 ": non-finite or malformed value '" + s + "' in column " +
                                 col);
    return v;
}

}  // namespace

Eigen::VectorXd make_low_fidelity(const Eigen::VectorXd& y_high, const NoiseSpec& noise) {
    validate_noise(noise);
    const double mean = y_high.mean();
    const double sigma_f = std::sqrt((y_high.array() - mean).square().mean());
    if (sigma_f <= 0.0)
        throw std::invalid_argument(
            "make_low_fidelity: y_high has zero variance, correlation undefined");
    const double rho = noise.target_corr;
    if (rho == 1.0) return y_high;
    const double sigma_n = sigma_f * std::sqrt(1.0 / (rho * rho) - 1.0);
    std::mt19937_64 rng(noise.rng_seed);
    std::normal_distribution<double> gauss(0.0, sigma_n);
    Eigen::VectorXd y_low(y_high.size());
    for (Eigen::Index i = 0; i < y_high.size(); ++i) y_low(i) = y_high(i) + gauss(rng);
    return y_low;
}

double rkhs_value(double x) {
    double v = 0.0;
    for (int i = 0; i < 5; ++i)
        v += kRkhsBroadWeights[i] * rbf(x, kRkhsBroadCenters[i], kRkhsBroadLs);
    for (int i = 0; i < 3; ++i)
        v += kRkhsSharpWeights[i] * rbf(x, kRkhsSharpCenters[i], kRkhsSharpLs);
    return v;
}

ProblemSpec rkhs_problem(double cost_low, const NoiseSpec& noise) {
    validate_noise(noise);
    const Eigen::Index n = 500;
    Eigen::MatrixXd features(n, 1);
    Eigen::VectorXd y_high(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(n - 1);
        features(i, 0) = x;
        y_high(i) = rkhs_value(x);
    }
    return make_problem(std::move(features), y_high, make_low_fidelity(y_high, noise),
                        cost_low, "rkhs");
}

double hartmann6_value(const Eigen::VectorXd& x) {
    if (x.size() != 6)
        throw std::invalid_argument("hartmann6_value: expected 6 coordinates");
    double v = 0.0;
    for (int i = 0; i < 4; ++i) {
        double e = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double d = x(j) - kHartP[i][j];
            e += kHartA[i][j] * d * d;
        }
        v += kHartAlpha[i] * std::exp(-e);
    }
    return v;  // negated Hartmann: maximize
}

Eigen::VectorXd hartmann6_argmax() {
    Eigen::VectorXd x(6);
    x << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
    return x;
}

ProblemSpec hartmann6_problem(Eigen::Index n_points, double cost_low,
                              const NoiseSpec& noise, std::uint64_t rng_seed) {
    if (n_points < 2)
        throw std::invalid_argument("hartmann6_problem: need at least 2 points");
    validate_noise(noise);
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd features(n_points + 1, 6);
    for (Eigen::Index i = 0; i < n_points; ++i)
        for (int j = 0; j < 6; ++j) features(i, j) = unif(rng);
    features.row(n_points) = hartmann6_argmax().transpose();

    Eigen::VectorXd y_high(n_points + 1);
    for (Eigen::Index i = 0; i <= n_points; ++i)
        y_high(i) = hartmann6_value(features.row(i).transpose());
    return make_problem(std::move(features), y_high, make_low_fidelity(y_high, noise),
                        cost_low, "hartmann6");
}

double f_comb(double E_S1, double IP, double f_osc_S1) {
    if (!(f_osc_S1 > 0.0))
        throw std::domain_error("f_comb: oscillator strength must be positive, got " +
                                std::to_string(f_osc_S1));
    return -std::abs(E_S1 - 3.0) - std::abs(IP - 5.5) + std::log(f_osc_S1);
}

ProblemSpec load_tabular_problem(const std::filesystem::path& path, double cost_low,
                                 bool recompute_target) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("tabular load: cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("tabular load: empty file " + path.string());
    const std::vector<std::string> header = split_csv_line(line);

    // header: id, f_0 .. f_{d-1}, y_high, y_low [, b_*] [, E_S1, IP, f_osc_S1]
    std::size_t d = 0;
    while (d + 1 < header.size() && header[d + 1] == "f_" + std::to_string(d)) ++d;
    if (header.empty() || header[0] != "id" || d == 0)
        throw std::runtime_error("tabular load: header must start with id, f_0, ...");
    auto col = [&](const std::string& name) -> std::ptrdiff_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<std::ptrdiff_t>(i);
        return -1;
    };
    const auto c_yh = col("y_high"), c_yl = col("y_low");
    if (c_yh < 0) throw std::runtime_error("tabular load: missing column y_high");
    if (c_yl < 0) throw std::runtime_error("tabular load: missing column y_low");
    std::size_t arity = 0;
    while (col("b_" + std::to_string(arity)) >= 0) ++arity;
    const auto c_es1 = col("E_S1"), c_ip = col("IP"), c_osc = col("f_osc_S1");
    if (recompute_target && (c_es1 < 0 || c_ip < 0 || c_osc < 0))
        throw std::runtime_error(
            "tabular load: --recompute-target requires E_S1, IP, f_osc_S1 columns");

    std::vector<std::vector<std::string>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("tabular load: row " + std::to_string(lineno) +
                                     " has " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(header.size()));
        rows.push_back(std::move(fields));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (n < 2) throw std::runtime_error("tabular load: need at least 2 data rows");

    Eigen::MatrixXd features(n, static_cast<Eigen::Index>(d));
    Eigen::VectorXd y_high(n), y_low(n);
    Eigen::MatrixXi blocks;
    if (arity > 0) blocks.resize(n, static_cast<Eigen::Index>(arity));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        const std::size_t rowno = static_cast<std::size_t>(i) + 2;
        for (std::size_t j = 0; j < d; ++j)
            features(i, static_cast<Eigen::Index>(j)) =
                parse_double(r[j + 1], rowno, "f_" + std::to_string(j));
        y_low(i) = parse_double(r[static_cast<std::size_t>(c_yl)], rowno, "y_low");
        if (recompute_target) {
            const double e = parse_double(r[static_cast<std::size_t>(c_es1)], rowno, "E_S1");
            const double ip = parse_double(r[static_cast<std::size_t>(c_ip)], rowno, "IP");
            const double fo =
                parse_double(r[static_cast<std::size_t>(c_osc)], rowno, "f_osc_S1");
            y_high(i) = f_comb(e, ip, fo);
        } else {
            y_high(i) = parse_double(r[static_cast<std::size_t>(c_yh)], rowno, "y_high");
        }
        for (std::size_t j = 0; j < arity; ++j) {
            const auto c = col("b_" + std::to_string(j));
            blocks(i, static_cast<Eigen::Index>(j)) = static_cast<int>(
                parse_double(r[static_cast<std::size_t>(c)], rowno, "b_" + std::to_string(j)));
        }
    }
    ProblemSpec p = make_problem(std::move(features), std::move(y_high), std::move(y_low),
                                 cost_low, path.stem().string());
    p.blocks = std::move(blocks);
    return p;
}

void save_tabular_problem(const ProblemSpec& problem, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("tabular save: cannot open " + path.string());
    out << "id";
    for (Eigen::Index j = 0; j < problem.dim(); ++j) out << ",f_" << j;
    out << ",y_high,y_low";
    for (Eigen::Index j = 0; j < problem.blocks.cols(); ++j) out << ",b_" << j;
    out << "\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < problem.size(); ++i) {
        out << i;
        for (Eigen::Index j = 0; j < problem.dim(); ++j) out << "," << problem.features(i, j);
        out << "," << problem.y_high(i) << "," << problem.y_low(i);
        for (Eigen::Index j = 0; j < problem.blocks.cols(); ++j)
            out << "," << problem.blocks(i, j);
        out << "\n";
    }
}

ProblemSpec cof_problem(double cost_low) {
    // Stand-in with the published table shape (608 rows, 14 features,
    // LOW/HIGH correlation 0.97); the real selectivity table is not bundled.
    const Eigen::Index n = 608, d = 14;
    std::mt19937_64 rng(20230608);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd features(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) features(i, j) = unif(rng);
    Eigen::VectorXd a(d), b(d);
    for (Eigen::Index j = 0; j < d; ++j) a(j) = unif(rng);
    for (Eigen::Index j = 0; j < d; ++j) b(j) = unif(rng);
    Eigen::VectorXd y_high(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double da = (features.row(i).transpose() - a).squaredNorm();
        const double db = (features.row(i).transpose() - b).squaredNorm();
        y_high(i) = 2.0 * std::exp(-da / (2.0 * 0.6 * 0.6)) + std::exp(-db / (2.0 * 0.4 * 0.4));
    }
    ProblemSpec p = make_problem(std::move(features), y_high,
                                 make_low_fidelity(y_high, {0.97, 97}), cost_low, "cof");
    return p;
}

ProblemSpec oligomer_problem(Eigen::Index n_points, double cost_low) {
    // Stand-in with the published table shape: 6 blocks per candidate drawn
    // from 306 types, 12-dimensional block embeddings concatenated into a
    // 72-dimensional feature vector, HIGH targets via f_comb of
    // block-additive properties, LOW/HIGH correlation 0.91.
    constexpr int kArity = 6, kTypes = 306, kEmbed = 12;
    std::mt19937_64 rng(20240449);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd embed(kTypes, kEmbed);
    for (int b = 0; b < kTypes; ++b)
        for (int j = 0; j < kEmbed; ++j) embed(b, j) = unif(rng);
    // property loadings: properties are linear in the block embeddings
    Eigen::VectorXd u1(kEmbed), u2(kEmbed), u3(kEmbed);
    for (int j = 0; j < kEmbed; ++j) u1(j) = 0.15 * unif(rng);
    for (int j = 0; j < kEmbed; ++j) u2(j) = 0.15 * unif(rng);
    for (int j = 0; j < kEmbed; ++j) u3(j) = 0.10 * unif(rng);

    std::uniform_int_distribution<int> pick(0, kTypes - 1);
    std::unordered_set<std::uint64_t> seen;
    Eigen::MatrixXi blocks(n_points, kArity);
    Eigen::MatrixXd features(n_points, kArity * kEmbed);
    Eigen::VectorXd y_high(n_points);
    Eigen::Index i = 0;
    while (i < n_points) {
        int ids[kArity];
        std::uint64_t key = 0;
        for (int k = 0; k < kArity; ++k) {
            ids[k] = pick(rng);
            key = key * kTypes + static_cast<std::uint64_t>(ids[k]);
        }
        if (!seen.insert(key).second) continue;
        double e_s1 = 3.0, ip = 5.5, log_osc = 0.0;
        for (int k = 0; k < kArity; ++k) {
            blocks(i, k) = ids[k];
            const Eigen::VectorXd e = embed.row(ids[k]).transpose();
            features.row(i).segment(k * kEmbed, kEmbed) = e.transpose();
            e_s1 += u1.dot(e);
            ip += u2.dot(e);
            log_osc += u3.dot(e);
        }
        y_high(i) = f_comb(e_s1, ip, std::exp(log_osc));
        ++i;
    }
    ProblemSpec p = make_problem(std::move(features), y_high,
                                 make_low_fidelity(y_high, {0.91, 91}), cost_low, "oligomer");
    p.blocks = std::move(blocks);
    return p;
}

}  // namespace mfbo

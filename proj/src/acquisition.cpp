#include "mfbo/acquisition.hpp"

#include <algorithm>
#include <random>

#include "mfbo/stats.hpp"

namespace mfbo {

namespace {

constexpr int kQuadPoints = 32;

const GaussHermite& quadrature() {
    static const GaussHermite gh(kQuadPoints);
    return gh;
}

Eigen::MatrixXd pool_features(const ProblemSpec& problem,
                              const std::vector<Eigen::Index>& pool) {
    Eigen::MatrixXd F(static_cast<Eigen::Index>(pool.size()), problem.dim());
    for (std::size_t i = 0; i < pool.size(); ++i)
        F.row(static_cast<Eigen::Index>(i)) = problem.features.row(pool[i]);
    return F;
}

// Quantile of the pool-max CDF prod_i Phi((y - mu_i)/sigma_i) by bisection.
double max_cdf_quantile(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                        double q) {
    const double smax = std::max(sigma.maxCoeff(), 1e-12);
    double lo = mu.minCoeff() - 12.0 * smax;
    double hi = mu.maxCoeff() + 12.0 * smax;
    const double log_q = std::log(q);
    for (int it = 0; it < 200 && hi - lo > 1e-10 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        double log_cdf = 0.0;
        for (Eigen::Index i = 0; i < mu.size(); ++i)
            log_cdf += log_norm_cdf((mid - mu(i)) / std::max(sigma(i), 1e-12));
        (log_cdf < log_q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Gumbel approximation to the posterior max, matched at quartiles.
std::vector<double> sample_fstar(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                                 std::uint64_t rng_seed, int n_fstar) {
    const double y25 = max_cdf_quantile(mu, sigma, 0.25);
    const double y50 = max_cdf_quantile(mu, sigma, 0.50);
    const double y75 = max_cdf_quantile(mu, sigma, 0.75);
    const double denom = std::log(std::log(4.0)) - std::log(std::log(4.0 / 3.0));
    const double b = std::max((y75 - y25) / denom, 0.0);
    const double a = y50 + b * std::log(std::log(2.0));

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(1e-12, 1.0 - 1e-12);
    std::vector<double> fstar(static_cast<std::size_t>(n_fstar));
    for (double& f : fstar) f = a - b * std::log(-std::log(unif(rng)));
    return fstar;
}

// Entropy of the noisy LOW observation y at x once f_HIGH(x) is known to lie
// below fstar. (muL, s2) describe y; (muH, vH) the latent HIGH value; c their
// covariance.
double truncated_low_entropy(double muL, double s2, double muH, double vH, double c,
                             double fstar) {
    const double h_marginal = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * s2);
    const double sH = std::sqrt(std::max(vH, 0.0));
    if (sH < 1e-9) return h_marginal;  // f_HIGH effectively known; no truncation
    const double gamma = (fstar - muH) / sH;
    const double log_z = log_norm_cdf(gamma);
    if (log_z < std::log(1e-12)) return h_marginal;  // vanishing mass; treat as no gain

    const double cond_var = std::max(vH - c * c / s2, 1e-18);
    const double cond_sd = std::sqrt(cond_var);
    const double s = std::sqrt(s2);
    const auto& gh = quadrature();
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    double acc = 0.0;
    for (int j = 0; j < kQuadPoints; ++j) {
        const double t = gh.nodes(j);
        const double y = muL + std::numbers::sqrt2 * s * t;
        const double log_phi_y = -t * t - 0.5 * std::log(2.0 * std::numbers::pi * s2);
        const double mu_cond = muH + (c / s2) * (y - muL);
        const double log_Phi = log_norm_cdf((fstar - mu_cond) / cond_sd);
        const double Phi = std::exp(log_Phi);
        acc += gh.weights(j) * inv_sqrt_pi * Phi * (log_phi_y + log_Phi - log_z);
    }
    return -acc * std::exp(-log_z);
}

}  // namespace

double ei_value(double mean, double stddev, double incumbent) {
    if (stddev < 1e-12) return std::max(mean - incumbent, 0.0);
    const double gamma = (mean - incumbent) / stddev;
    return std::max(stddev * (gamma * norm_cdf(gamma) + norm_pdf(gamma)), 0.0);
}

double mes_high_term(double gamma) {
    const double g = std::clamp(gamma, -30.0, 30.0);
    const double log_cdf = log_norm_cdf(g);
    return std::max(g * norm_pdf(g) / (2.0 * std::exp(log_cdf)) - log_cdf, 0.0);
}

AcqScores sf_ei(const GpModel& model, const ProblemSpec& problem,
                const std::vector<Eigen::Index>& pool, double incumbent) {
    if (pool.empty()) throw std::invalid_argument("sf_ei: empty candidate pool");
    const Eigen::MatrixXd F = pool_features(problem, pool);
    const std::vector<Fid> fids(pool.size(), Fid::High);
    auto [mean, var] = model.posterior(F, fids);

    AcqScores out;
    out.pairs.reserve(pool.size());
    out.scores.resize(static_cast<Eigen::Index>(pool.size()));
    for (std::size_t i = 0; i < pool.size(); ++i) {
        out.pairs.push_back({pool[i], Fid::High});
        const auto k = static_cast<Eigen::Index>(i);
        out.scores(k) = ei_value(mean(k), std::sqrt(var(k)), incumbent);
    }
    return out;
}

AcqScores mf_mes(const GpModel& model, const ProblemSpec& problem,
                 const std::vector<Eigen::Index>& pool, std::uint64_t rng_seed,
                 int n_fstar) {
    if (pool.empty()) throw std::invalid_argument("mf_mes: empty candidate pool");
    // f* is a property of the HIGH posterior; demand HIGH training data
    if (!model.has_fidelity(Fid::High))
        throw std::invalid_argument("mf_mes: model has no HIGH training data");

    const Eigen::MatrixXd F = pool_features(problem, pool);
    const Eigen::Index np = F.rows();
    const std::vector<Fid> high_fids(pool.size(), Fid::High);
    const std::vector<Fid> low_fids(pool.size(), Fid::Low);
    auto [mu_h, var_h] = model.posterior(F, high_fids);
    auto [mu_l, var_l] = model.posterior(F, low_fids);
    const Eigen::VectorXd sigma_h = var_h.cwiseSqrt();

    const std::vector<double> fstar = sample_fstar(mu_h, sigma_h, rng_seed, n_fstar);

    const double noise_h = model.observation_noise(Fid::High);
    const double noise_l = model.observation_noise(Fid::Low);

    AcqScores out;
    out.pairs.reserve(2 * pool.size());
    out.scores.resize(2 * np);
    for (Eigen::Index i = 0; i < np; ++i) {
        // HIGH pair: truncated-Gaussian entropy gain, averaged over f*
        const double s_obs = std::sqrt(var_h(i) + noise_h);
        double gain_h = 0.0;
        if (s_obs >= 1e-9) {
            for (double f : fstar) gain_h += mes_high_term((f - mu_h(i)) / s_obs);
            gain_h /= static_cast<double>(fstar.size());
        }
        out.pairs.push_back({pool[static_cast<std::size_t>(i)], Fid::High});
        out.scores(2 * i) = std::max(gain_h, 0.0) / problem.cost(Fid::High);

        // LOW pair: marginal minus expected truncated entropy of y_LOW
        const double s2 = var_l(i) + noise_l;
        double gain_l = 0.0;
        if (s2 >= 1e-18) {
            const double c = model.posterior_cov(F.row(i).transpose(), Fid::Low,
                                                 F.row(i).transpose(), Fid::High);
            const double h_marg =
                0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * s2);
            double h_cond = 0.0;
            for (double f : fstar)
                h_cond += truncated_low_entropy(mu_l(i), s2, mu_h(i), var_h(i), c, f);
            h_cond /= static_cast<double>(fstar.size());
            gain_l = h_marg - h_cond;
        }
        out.pairs.push_back({pool[static_cast<std::size_t>(i)], Fid::Low});
        out.scores(2 * i + 1) = std::max(gain_l, 0.0) / problem.cost(Fid::Low);
    }
    return out;
}

AcqScores mf_tvr(const GpModel& model, const ProblemSpec& problem,
                 const std::vector<Eigen::Index>& pool, double incumbent) {
    if (pool.empty()) throw std::invalid_argument("mf_tvr: empty candidate pool");
    const AcqScores ei = sf_ei(model, problem, pool, incumbent);
    Eigen::Index best = 0;
    ei.scores.maxCoeff(&best);  // Eigen returns the first (lowest) max index
    const Eigen::Index target = ei.pairs[static_cast<std::size_t>(best)].candidate;
    const double ei_target = ei.scores(best);
    const Eigen::VectorXd xt = problem.features.row(target).transpose();

    AcqScores out;
    out.pairs.reserve(2 * pool.size());
    out.scores.resize(2 * static_cast<Eigen::Index>(pool.size()));
    Eigen::Index k = 0;
    for (Eigen::Index idx : pool) {
        const Eigen::VectorXd x = problem.features.row(idx).transpose();
        for (Fid m : {Fid::High, Fid::Low}) {
            const auto [mu, var] = model.posterior1(x, m);
            (void)mu;
            const double c = model.posterior_cov(xt, Fid::High, x, m);
            const double denom = var + model.observation_noise(m);
            const double reduction = denom > 0.0 ? c * c / denom : 0.0;
            out.pairs.push_back({idx, m});
            out.scores(k++) = ei_target * reduction / problem.cost(m);
        }
    }
    return out;
}

AcqScores mf_custom(const AcqScores& mes, const AcqScores& tvr) {
    if (mes.pairs != tvr.pairs)
        throw std::invalid_argument("mf_custom: pair lists differ");
    const double nm = mes.scores.norm();
    const double nt = tvr.scores.norm();
    AcqScores out;
    out.pairs = mes.pairs;
    out.scores = Eigen::VectorXd::Zero(mes.scores.size());
    if (nm > 0.0) out.scores += mes.scores / nm;
    if (nt > 0.0) out.scores += tvr.scores / nt;
    return out;
}

PairKey select_next(const AcqScores& scores, const std::set<PairKey>& observed) {
    if (scores.pairs.empty()) throw std::invalid_argument("select_next: empty scores");
    bool found = false;
    PairKey best{};
    double best_score = 0.0;
    for (std::size_t i = 0; i < scores.pairs.size(); ++i) {
        const PairKey& p = scores.pairs[i];
        if (observed.count(p)) continue;
        const double s = scores.scores(static_cast<Eigen::Index>(i));
        bool better = !found || s > best_score;
        if (found && s == best_score) {
            // ties: HIGH before LOW, then lowest candidate index
            if (p.fidelity == Fid::High && best.fidelity == Fid::Low)
                better = true;
            else if (p.fidelity == best.fidelity && p.candidate < best.candidate)
                better = true;
        }
        if (better) {
            found = true;
            best = p;
            best_score = s;
        }
    }
    if (!found) throw std::runtime_error("select_next: domain exhausted, all pairs observed");
    return best;
}

}  // namespace mfbo

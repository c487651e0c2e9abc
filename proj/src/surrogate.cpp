#include "mfbo/surrogate.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numbers>

namespace mfbo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Scaler {
    Eigen::VectorXd min, range;

    static Scaler from_domain(const ProblemSpec& problem) {
        Scaler s;
        s.min = problem.features.colwise().minCoeff();
        s.range = (problem.features.colwise().maxCoeff().transpose() - s.min).eval();
        for (Eigen::Index j = 0; j < s.range.size(); ++j)
            if (s.range(j) <= 0.0) s.range(j) = 1.0;
        return s;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        return (x - min).cwiseQuotient(range);
    }
};

struct TrainSet {
    Eigen::MatrixXd X;  // scaled, n x d
    std::vector<Fid> fids;
    Eigen::VectorXd y;  // standardized
    double mean = 0.0, std = 1.0;
    bool degenerate = false;  // all targets identical
    bool has_low = false;

    static TrainSet assemble(std::span<const Observation> obs,
                             const ProblemSpec& problem, const Scaler& scaler) {
        const Eigen::Index n = static_cast<Eigen::Index>(obs.size());
        const Eigen::Index d = problem.dim();
        TrainSet t;
        t.X.resize(n, d);
        t.fids.reserve(n);
        Eigen::VectorXd raw(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Observation& o = obs[i];
            if (o.candidate < 0 || o.candidate >= problem.size())
                throw std::invalid_argument("surrogate: observation candidate index out of range");
            t.X.row(i) = scaler.apply(problem.features.row(o.candidate).transpose()).transpose();
            t.fids.push_back(o.fidelity);
            if (o.fidelity == Fid::Low) t.has_low = true;
            raw(i) = o.value;
        }
        t.mean = n > 0 ? raw.mean() : 0.0;
        const double var = n > 0 ? (raw.array() - t.mean).square().mean() : 0.0;
        t.std = std::sqrt(var);
        if (t.std < 1e-12) {
            t.std = 1.0;
            t.degenerate = n > 0;
        }
        t.y = (raw.array() - t.mean) / t.std;
        return t;
    }
};

// Pairwise squared distances of rows, optionally with per-dimension inverse
// lengthscale weighting already applied to X.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& X) {
    const Eigen::VectorXd sq = X.rowwise().squaredNorm();
    Eigen::MatrixXd D = sq.replicate(1, X.rows()) + sq.transpose().replicate(X.rows(), 1) -
                        2.0 * X * X.transpose();
    return D.cwiseMax(0.0);
}

Eigen::MatrixXd kernel_matrix(const KernelParams& p, const TrainSet& t,
                              const Eigen::MatrixXd* cached_sqdist) {
    const Eigen::Index n = t.X.rows();
    Eigen::MatrixXd K(n, n);
    if (p.lengthscale.size() == 1 && cached_sqdist) {
        const double inv2 = 1.0 / (2.0 * p.lengthscale(0) * p.lengthscale(0));
        K = (-(*cached_sqdist) * inv2).array().exp().matrix() * p.signal_variance;
    } else {
        Eigen::MatrixXd Xw = t.X;
        if (p.lengthscale.size() == 1)
            Xw /= p.lengthscale(0);
        else
            Xw = Xw * p.lengthscale.cwiseInverse().asDiagonal();
        K = (-0.5 * squared_distances(Xw)).array().exp().matrix() * p.signal_variance;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            if (t.fids[i] != t.fids[j]) {
                K(i, j) *= p.fidelity_corr;
                K(j, i) = K(i, j);
            }
    for (Eigen::Index i = 0; i < n; ++i)
        K(i, i) += p.noise(t.fids[i]);
    return K;
}

// Cholesky with jitter escalation. Returns the lower factor or nullopt.
std::optional<Eigen::MatrixXd> chol_jittered(Eigen::MatrixXd K) {
    for (double jitter = kJitterStart; jitter <= kJitterMax * (1.0 + 1e-12); jitter *= 10.0) {
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(Kj);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    return std::nullopt;
}

double lml_from_chol(const Eigen::MatrixXd& L, const Eigen::VectorXd& y) {
    const Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(y);
    return -0.5 * z.squaredNorm() - L.diagonal().array().log().sum() -
           0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

// ---- hyperparameter search ------------------------------------------------

struct ThetaSpace {
    // layout: [ln sv, ln l_0 .. ln l_{k-1}, atanh rho, ln noise_low, ln noise_high]
    Eigen::Index n_ls = 1;
    bool search_corr = true;   // off when there are no LOW observations
    bool search_nlow = true;

    Eigen::Index size() const { return 3 + n_ls + 1; }

    Eigen::VectorXd pack(const KernelParams& p) const {
        Eigen::VectorXd th(size());
        th(0) = std::log(p.signal_variance);
        for (Eigen::Index j = 0; j < n_ls; ++j)
            th(1 + j) = std::log(p.lengthscale(p.lengthscale.size() == n_ls ? j : 0));
        th(1 + n_ls) = std::atanh(std::clamp(p.fidelity_corr, -0.999, 0.999));
        th(2 + n_ls) = std::log(std::max(p.noise_low, kNoiseFloor));
        th(3 + n_ls) = std::log(std::max(p.noise_high, kNoiseFloor));
        return th;
    }

    KernelParams unpack(const Eigen::VectorXd& th) const {
        KernelParams p;
        p.signal_variance = std::exp(th(0));
        p.lengthscale = th.segment(1, n_ls).array().exp().matrix();
        p.fidelity_corr = std::tanh(th(1 + n_ls));
        p.noise_low = std::exp(th(2 + n_ls));
        p.noise_high = std::exp(th(3 + n_ls));
        return p;
    }

    void clamp(Eigen::VectorXd& th) const {
        // caps keep the kernel away from the ill-conditioned linear limit
        th(0) = std::clamp(th(0), std::log(1e-4), std::log(1e2));
        for (Eigen::Index j = 0; j < n_ls; ++j)
            th(1 + j) = std::clamp(th(1 + j), std::log(1e-3), std::log(1e2));
        th(1 + n_ls) = std::clamp(th(1 + n_ls), -3.8, 3.8);
        th(2 + n_ls) = std::clamp(th(2 + n_ls), std::log(kNoiseFloor), 0.0);
        th(3 + n_ls) = std::clamp(th(3 + n_ls), std::log(kNoiseFloor), 0.0);
    }

    bool active(Eigen::Index k) const {
        if (k == 1 + n_ls) return search_corr;
        if (k == 2 + n_ls) return search_nlow;
        return true;
    }
};

double objective(const Eigen::VectorXd& th, const ThetaSpace& space, const TrainSet& t,
                 const Eigen::MatrixXd* sqdist) {
    const KernelParams p = space.unpack(th);
    const Eigen::MatrixXd K = kernel_matrix(p, t, sqdist);
    const auto L = chol_jittered(K);
    if (!L) return -kInf;
    return lml_from_chol(*L, t.y);
}

// Greedy coordinate-wise pattern search with step halving.
std::pair<Eigen::VectorXd, double> pattern_search(Eigen::VectorXd th,
                                                  const ThetaSpace& space,
                                                  const TrainSet& t,
                                                  const Eigen::MatrixXd* sqdist,
                                                  int max_iterations) {
    space.clamp(th);
    double best = objective(th, space, t, sqdist);
    double step = 0.5;
    for (int it = 0; it < max_iterations && step >= 1e-3; ++it) {
        bool improved = false;
        for (Eigen::Index k = 0; k < space.size(); ++k) {
            if (!space.active(k)) continue;
            for (double sign : {+1.0, -1.0}) {
                Eigen::VectorXd cand = th;
                cand(k) += sign * step;
                space.clamp(cand);
                const double v = objective(cand, space, t, sqdist);
                if (v > best) {
                    best = v;
                    th = cand;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return {th, best};
}

std::vector<KernelParams> fixed_starts(Eigen::Index d, Eigen::Index n_ls) {
    // lengthscale quantiles are fractions of the scaled-domain diameter
    const double diam = std::sqrt(static_cast<double>(d));
    const double ls_q[4] = {0.05, 0.15, 0.4, 1.0};
    const double corr_q[4] = {0.9, 0.7, 0.5, 0.3};
    std::vector<KernelParams> starts;
    for (int r = 0; r < 4; ++r) {
        KernelParams p;
        p.signal_variance = 1.0;
        p.lengthscale = Eigen::VectorXd::Constant(n_ls, ls_q[r] * diam);
        p.fidelity_corr = corr_q[r];
        p.noise_low = 1e-3;
        p.noise_high = 1e-3;
        starts.push_back(std::move(p));
    }
    return starts;
}

}  // namespace

GpModel GpModel::build(const KernelParams& params,
                       std::span<const Observation> observations,
                       const ProblemSpec& problem) {
    const Scaler scaler = Scaler::from_domain(problem);
    const TrainSet t = TrainSet::assemble(observations, problem, scaler);

    GpModel m;
    m.params_ = params;
    if (m.params_.lengthscale.size() != 1 && m.params_.lengthscale.size() != problem.dim())
        throw std::invalid_argument("surrogate: lengthscale must have 1 or d entries");
    m.params_.noise_low = std::max(m.params_.noise_low, kNoiseFloor);
    m.params_.noise_high = std::max(m.params_.noise_high, kNoiseFloor);
    m.train_scaled_ = t.X;
    m.train_fids_ = t.fids;
    m.target_mean_ = t.mean;
    m.target_std_ = t.std;
    m.feat_min_ = scaler.min;
    m.feat_range_ = scaler.range;

    if (observations.empty()) {
        m.lml_ = 0.0;
        return m;
    }
    const Eigen::MatrixXd K = kernel_matrix(m.params_, t, nullptr);
    const auto L = chol_jittered(K);
    if (!L)
        throw std::runtime_error(
            "surrogate: kernel matrix not positive definite after jitter escalation");
    m.chol_lower_ = *L;
    m.alpha_ = m.chol_lower_.triangularView<Eigen::Lower>().transpose().solve(
        m.chol_lower_.triangularView<Eigen::Lower>().solve(t.y));
    m.lml_ = lml_from_chol(m.chol_lower_, t.y);
    return m;
}

GpModel GpModel::fit(std::span<const Observation> observations,
                     const ProblemSpec& problem, const FitConfig& config,
                     std::uint64_t /*rng_seed*/) {
    if (observations.size() < 2)
        throw std::invalid_argument("surrogate: fit needs at least 2 observations");
    bool any_high = false;
    for (const Observation& o : observations) any_high |= o.fidelity == Fid::High;
    if (!any_high)
        throw std::invalid_argument("surrogate: fit needs at least one HIGH observation");

    const Scaler scaler = Scaler::from_domain(problem);
    const TrainSet t = TrainSet::assemble(observations, problem, scaler);

    if (t.degenerate) {
        KernelParams p;
        p.signal_variance = 1.0;
        p.lengthscale = Eigen::VectorXd::Ones(config.ard ? problem.dim() : 1);
        p.fidelity_corr = 0.5;
        p.noise_low = kNoiseFloor;
        p.noise_high = kNoiseFloor;
        return build(p, observations, problem);
    }

    ThetaSpace space;
    space.n_ls = config.ard ? problem.dim() : 1;
    space.search_corr = t.has_low;
    space.search_nlow = t.has_low;

    std::optional<Eigen::MatrixXd> sqdist;
    if (!config.ard) sqdist = squared_distances(t.X);
    const Eigen::MatrixXd* sq = sqdist ? &*sqdist : nullptr;

    std::vector<KernelParams> starts = fixed_starts(problem.dim(), space.n_ls);
    if (static_cast<int>(starts.size()) > config.restarts)
        starts.resize(std::max(config.restarts, 1));
    if (config.warm_start) {
        KernelParams w = *config.warm_start;
        if (w.lengthscale.size() != space.n_ls)
            w.lengthscale = Eigen::VectorXd::Constant(space.n_ls, w.lengthscale.mean());
        starts.push_back(std::move(w));
    }

    Eigen::VectorXd best_theta;
    double best_lml = -kInf;
    for (const KernelParams& start : starts) {
        auto [th, v] = pattern_search(space.pack(start), space, t, sq, config.max_iterations);
        if (v > best_lml) {  // ties keep the earliest start
            best_lml = v;
            best_theta = th;
        }
    }
    if (!std::isfinite(best_lml))
        throw std::runtime_error(
            "surrogate: no positive-definite kernel found during fitting");
    return build(space.unpack(best_theta), observations, problem);
}

Eigen::VectorXd GpModel::scale_query(const Eigen::VectorXd& raw) const {
    if (raw.size() != feat_min_.size())
        throw std::invalid_argument("surrogate: query dimension " +
                                    std::to_string(raw.size()) + " != domain dimension " +
                                    std::to_string(feat_min_.size()));
    return (raw - feat_min_).cwiseQuotient(feat_range_);
}

double GpModel::kernel_scalar(const Eigen::VectorXd& sa, Fid ma,
                              const Eigen::VectorXd& sb, Fid mb) const {
    Eigen::VectorXd diff = sa - sb;
    if (params_.lengthscale.size() == 1)
        diff /= params_.lengthscale(0);
    else
        diff = diff.cwiseQuotient(params_.lengthscale);
    double k = params_.signal_variance * std::exp(-0.5 * diff.squaredNorm());
    if (ma != mb) k *= params_.fidelity_corr;
    return k;
}

Eigen::VectorXd GpModel::kernel_vector(const Eigen::VectorXd& scaled, Fid m) const {
    const Eigen::Index n = train_size();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i)
        k(i) = kernel_scalar(scaled, m, train_scaled_.row(i).transpose(), train_fids_[i]);
    return k;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> GpModel::posterior(
    const Eigen::MatrixXd& query_features, const std::vector<Fid>& query_fids) const {
    const Eigen::Index q = query_features.rows();
    if (static_cast<Eigen::Index>(query_fids.size()) != q)
        throw std::invalid_argument("surrogate: query fidelity list length mismatch");
    Eigen::VectorXd mean(q), var(q);
    const double ts2 = target_std_ * target_std_;
    for (Eigen::Index i = 0; i < q; ++i) {
        const Eigen::VectorXd s = scale_query(query_features.row(i).transpose());
        const double prior = params_.signal_variance;
        if (train_size() == 0) {
            mean(i) = target_mean_;
            var(i) = prior * ts2;
            continue;
        }
        const Eigen::VectorXd k = kernel_vector(s, query_fids[i]);
        const Eigen::VectorXd z = chol_lower_.triangularView<Eigen::Lower>().solve(k);
        mean(i) = target_mean_ + target_std_ * k.dot(alpha_);
        var(i) = std::max(0.0, prior - z.squaredNorm()) * ts2;
    }
    return {mean, var};
}

std::pair<double, double> GpModel::posterior1(const Eigen::VectorXd& features, Fid m) const {
    Eigen::MatrixXd Q(1, features.size());
    Q.row(0) = features.transpose();
    auto [mean, var] = posterior(Q, {m});
    return {mean(0), var(0)};
}

double GpModel::posterior_cov(const Eigen::VectorXd& a, Fid fid_a,
                              const Eigen::VectorXd& b, Fid fid_b) const {
    const Eigen::VectorXd sa = scale_query(a), sb = scale_query(b);
    const double ts2 = target_std_ * target_std_;
    const double prior = kernel_scalar(sa, fid_a, sb, fid_b);
    if (train_size() == 0) return prior * ts2;
    const Eigen::VectorXd ka = kernel_vector(sa, fid_a), kb = kernel_vector(sb, fid_b);
    const Eigen::VectorXd za = chol_lower_.triangularView<Eigen::Lower>().solve(ka);
    const Eigen::VectorXd zb = chol_lower_.triangularView<Eigen::Lower>().solve(kb);
    return (prior - za.dot(zb)) * ts2;
}

double log_marginal_likelihood(const KernelParams& params,
                               std::span<const Observation> observations,
                               const ProblemSpec& problem) {
    const Scaler scaler = Scaler::from_domain(problem);
    const TrainSet t = TrainSet::assemble(observations, problem, scaler);
    const Eigen::MatrixXd K = kernel_matrix(params, t, nullptr);
    const auto L = chol_jittered(K);
    if (!L)
        throw std::runtime_error(
            "surrogate: kernel matrix not positive definite after jitter escalation");
    return lml_from_chol(*L, t.y);
}

}  // namespace mfbo

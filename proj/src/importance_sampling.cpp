#include "cvarssp/importance_sampling.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

namespace cvarssp {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x * x;
    return std::sqrt(s);
}

double sum(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

double finite_log_pdf(const Density& density, std::span<const double> x) {
    const double lp = density.log_pdf(x);
    if (!std::isfinite(lp))
        throw AbsoluteContinuityViolation(
            "density vanishes at a point required by a translation weight");
    return lp;
}

/// Streaming mean/variance accumulator.
struct Welford {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

struct IsStepInfo {
    double xi_increment = 0.0;
    double var_weight = 1.0;
};

}  // namespace

void IsConfig::validate() const {
    if (!(rho > 0.0)) throw std::invalid_argument("IS rho must be positive");
    if (!(b >= 1.0 && b <= 2.0)) throw std::invalid_argument("IS b must lie in [1,2]");
    if (!(growth_c >= 1.0)) throw std::invalid_argument("IS growth exponent must be >= 1");
    if (!(alpha_boost >= 1.0))
        throw std::invalid_argument("IS alpha boost must be >= 1");
}

GaussianDensity::GaussianDensity(std::vector<double> mean, std::vector<double> sigma)
    : mean_(std::move(mean)), sigma_(std::move(sigma)) {
    if (mean_.empty() || mean_.size() != sigma_.size())
        throw std::invalid_argument("Gaussian mean/sigma dimensions disagree");
    for (const double s : sigma_)
        if (!(s > 0.0)) throw std::invalid_argument("Gaussian sigma must be positive");
}

GaussianDensity GaussianDensity::standard(int dim) {
    return GaussianDensity(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

double GaussianDensity::log_pdf(std::span<const double> x) const {
    assert(x.size() == mean_.size());
    double lp = 0.0;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
        const double z = (x[i] - mean_[i]) / sigma_[i];
        lp += -0.5 * z * z - std::log(sigma_[i] * std::sqrt(kTwoPi));
    }
    return lp;
}

void GaussianDensity::score(std::span<const double> x, std::span<double> out) const {
    assert(x.size() == mean_.size() && out.size() == mean_.size());
    for (std::size_t i = 0; i < mean_.size(); ++i)
        out[i] = -(x[i] - mean_[i]) / (sigma_[i] * sigma_[i]);
}

void GaussianDensity::sample(RandomStream& rng, std::span<double> out) const {
    assert(out.size() == mean_.size());
    for (std::size_t i = 0; i < mean_.size(); ++i)
        out[i] = mean_[i] + sigma_[i] * rng.normal();
}

namespace {

IsStepInfo continuous_is_step_impl(IsState& state, std::span<const double> x,
                                   const Density& density, double zeta1, double zeta2,
                                   double alpha, const IsConfig& cfg, bool adapt) {
    const std::size_t d = x.size();
    assert(static_cast<int>(d) == density.dim());
    if (state.eta.empty()) state.eta.assign(d, 0.0);
    if (state.mu.empty()) state.mu.assign(d, 0.0);
    assert(state.eta.size() == d && state.mu.size() == d);

    const double value = sum(x);
    if (!state.seeded) {
        state.xi = value;
        state.psi = value;
        state.xi_aux = value;
        state.seeded = true;
    }

    const double xi0 = state.xi;
    const double psi0 = state.psi;
    const double xi_aux0 = state.xi_aux;
    const std::vector<double> eta0 = state.eta;
    const std::vector<double> mu0 = state.mu;
    const double inv_tail = 1.0 / (1.0 - alpha);
    const double boost = cfg.alpha_boost;
    // Adaptation gates against the boosted-level tracker; xi/psi never do.
    const double gate = boost > 1.0 ? xi_aux0 : xi0;

    const double log_px = finite_log_pdf(density, x);
    std::vector<double> point(d), score(d);

    // VaR step, Eq. form: xi' = xi - z1 e^(-rho|eta|^b) (1 - 1{.} w / (1-a)).
    const double eta_norm = norm2(eta0);
    const double damp1 = std::exp(-cfg.rho * std::pow(eta_norm, cfg.b));
    for (std::size_t i = 0; i < d; ++i) point[i] = x[i] + eta0[i];
    const double w_var = std::exp(finite_log_pdf(density, point) - log_px);
    const double ind_var = value + sum(eta0) >= xi0 ? 1.0 : 0.0;
    const double xi_increment = damp1 * (1.0 - ind_var * w_var * inv_tail);
    state.xi = xi0 - zeta1 * xi_increment;

    if (boost > 1.0) {
        const double aux_tail = std::min(0.5, boost * (1.0 - alpha));
        const double ind_aux = value >= xi_aux0 ? 1.0 : 0.0;
        state.xi_aux = xi_aux0 + zeta1 * boost * (ind_aux / aux_tail - 1.0);
    }

    // Translation step for eta with the double-translation kernel.
    if (adapt && value - sum(eta0) >= gate) {
        const double damp2 = std::exp(-2.0 * cfg.rho * std::pow(eta_norm, cfg.b));
        for (std::size_t i = 0; i < d; ++i) point[i] = x[i] - eta0[i];
        const double log_pm = finite_log_pdf(density, point);
        for (std::size_t i = 0; i < d; ++i) point[i] = x[i] - 2.0 * eta0[i];
        const double log_pm2 = finite_log_pdf(density, point);
        density.score(point, score);
        const double kernel = std::exp(2.0 * log_pm - log_px - log_pm2);
        for (std::size_t i = 0; i < d; ++i)
            state.eta[i] = eta0[i] - zeta1 * boost * damp2 * kernel * score[i];
    }

    // CVaR step with the mu-translated weight.
    const double mu_norm = norm2(mu0);
    for (std::size_t i = 0; i < d; ++i) point[i] = x[i] + mu0[i];
    const double w_cvar = std::exp(finite_log_pdf(density, point) - log_px);
    const double shifted = value + sum(mu0);
    const double tail_term =
        shifted >= xi0 ? inv_tail * (shifted - xi0) * w_cvar : 0.0;
    state.psi = psi0 - zeta2 * (psi0 - xi0 - tail_term);

    // Translation step for mu with the squared-excess factor and normalizer.
    if (adapt && value - sum(mu0) >= gate) {
        const double damp2 = std::exp(-2.0 * cfg.rho * std::pow(mu_norm, cfg.b));
        const double normalizer =
            damp2 / (1.0 + std::pow(growth_w(mu_norm), 2.0 * cfg.growth_c) + gate * gate);
        const double excess = value - sum(mu0) - gate;
        for (std::size_t i = 0; i < d; ++i) point[i] = x[i] - mu0[i];
        const double log_pm = finite_log_pdf(density, point);
        for (std::size_t i = 0; i < d; ++i) point[i] = x[i] - 2.0 * mu0[i];
        const double log_pm2 = finite_log_pdf(density, point);
        density.score(point, score);
        const double kernel = std::exp(2.0 * log_pm - log_px - log_pm2);
        for (std::size_t i = 0; i < d; ++i)
            state.mu[i] =
                mu0[i] - zeta2 * boost * normalizer * excess * excess * kernel * score[i];
    }

    ++state.n;
    return {xi_increment, w_var};
}

}  // namespace

void continuous_is_step(IsState& state, std::span<const double> x,
                        const Density& density, double zeta1, double zeta2,
                        double alpha, const IsConfig& cfg, bool adapt) {
    continuous_is_step_impl(state, x, density, zeta1, zeta2, alpha, cfg, adapt);
}

IsEstimate estimate_continuous(const Density& density, double alpha,
                               const IsConfig& cfg, const PowerSchedule& zeta1,
                               const PowerSchedule& zeta2, long steps,
                               std::uint64_t seed, bool adapt) {
    cfg.validate();
    IsState state;
    state.eta.assign(density.dim(), 0.0);
    state.mu.assign(density.dim(), 0.0);

    RandomStream rng(seed);
    std::vector<double> x(density.dim());
    Welford increments;
    double weight_sum = 0.0;
    long violations = 0;
    for (long n = 1; n <= steps; ++n) {
        density.sample(rng, x);
        const IsStepInfo info = continuous_is_step_impl(
            state, x, density, zeta1(n), zeta2(n), alpha, cfg, adapt);
        weight_sum += info.var_weight;
        if (n > steps / 2) increments.add(info.xi_increment);
        if (n > 100) {
            const double excess = std::max(sum(x) - state.xi, 0.0);
            if (excess > std::pow(growth_w(norm2(x)), cfg.growth_c)) ++violations;
        }
    }
    IsEstimate out;
    out.xi = state.xi;
    out.psi = state.psi;
    out.eta = state.eta;
    out.mu = state.mu;
    out.weight_mean = steps > 0 ? weight_sum / static_cast<double>(steps) : 1.0;
    out.xi_increment_variance = increments.variance();
    out.growth_check_violations = violations;
    return out;
}

double ssp_is_weight(const EpisodeTrace& episode, const SoftmaxPolicy& base,
                     std::span<const double> translation) {
    assert(translation.size() == base.theta().size());
    SoftmaxPolicy shifted = base;
    for (std::size_t i = 0; i < translation.size(); ++i)
        shifted.theta()[i] += translation[i];

    double log_ratio = 0.0;
    std::vector<double> p_base, p_shift;
    for (std::size_t m = 0; m < episode.states.size(); ++m) {
        const int s = episode.states[m];
        const int a = episode.actions[m];
        base.action_probabilities(s, p_base);
        shifted.action_probabilities(s, p_shift);
        log_ratio += std::log(p_base[a]) - std::log(p_shift[a]);
    }
    return std::exp(log_ratio);
}

namespace {

IsStepInfo ssp_is_update_impl(IsState& state, const EpisodeTrace& var_ep, double w_var,
                              const EpisodeTrace& cvar_ep, double w_cvar, double zeta1,
                              double zeta2, double alpha, const IsConfig& cfg,
                              bool adapt) {
    const std::size_t d = var_ep.score_sum.size();
    if (state.eta.empty()) state.eta.assign(d, 0.0);
    if (state.mu.empty()) state.mu.assign(d, 0.0);
    assert(state.eta.size() == d && state.mu.size() == d);

    if (!state.seeded) {
        state.xi = var_ep.total_c;
        state.psi = var_ep.total_c;
        state.xi_aux = var_ep.total_c;
        state.seeded = true;
    }
    const double xi0 = state.xi;
    const double psi0 = state.psi;
    const double xi_aux0 = state.xi_aux;
    const double inv_tail = 1.0 / (1.0 - alpha);
    const double boost = cfg.alpha_boost;
    const double gate = boost > 1.0 ? xi_aux0 : xi0;

    // VaR recursion fed by the eta-translated episode.
    const double eta_norm = norm2(state.eta);
    const double damp1 = std::exp(-cfg.rho * std::pow(eta_norm, cfg.b));
    const double ind_var = var_ep.total_c >= xi0 ? 1.0 : 0.0;
    const double xi_increment = damp1 * (1.0 - ind_var * w_var * inv_tail);
    state.xi = xi0 - zeta1 * xi_increment;

    if (boost > 1.0) {
        const double aux_tail = std::min(0.5, boost * (1.0 - alpha));
        const double ind_aux = var_ep.total_c >= xi_aux0 ? 1.0 : 0.0;
        state.xi_aux = xi_aux0 + zeta1 * boost * (ind_aux * w_var / aux_tail - 1.0);
    }

    // eta descends the score-function gradient of Q1(eta) = E[1{C>=xi} w^2].
    if (adapt && var_ep.total_c >= gate) {
        const double damp2 = std::exp(-2.0 * cfg.rho * std::pow(eta_norm, cfg.b));
        const double scale = zeta1 * boost * damp2 * w_var * w_var;
        for (std::size_t i = 0; i < d; ++i)
            state.eta[i] += scale * var_ep.score_sum[i];
    }

    // CVaR recursion fed by the mu-translated episode.
    const double tail_term = cvar_ep.total_c >= xi0
                                 ? inv_tail * (cvar_ep.total_c - xi0) * w_cvar
                                 : 0.0;
    state.psi = psi0 - zeta2 * (psi0 - xi0 - tail_term);

    // mu descends the gradient of Q2(mu) = E[(C-xi)+^2 w^2].
    if (adapt && cvar_ep.total_c >= gate) {
        const double mu_norm = norm2(state.mu);
        const double damp2 = std::exp(-2.0 * cfg.rho * std::pow(mu_norm, cfg.b));
        const double normalizer =
            damp2 / (1.0 + std::pow(growth_w(mu_norm), 2.0 * cfg.growth_c) + gate * gate);
        const double excess = cvar_ep.total_c - gate;
        const double scale =
            zeta2 * boost * normalizer * excess * excess * w_cvar * w_cvar;
        for (std::size_t i = 0; i < d; ++i)
            state.mu[i] += scale * cvar_ep.score_sum[i];
    }

    ++state.n;
    return {xi_increment, w_var};
}

}  // namespace

void ssp_is_update(IsState& state, const EpisodeTrace& var_ep, double w_var,
                   const EpisodeTrace& cvar_ep, double w_cvar, double zeta1,
                   double zeta2, double alpha, const IsConfig& cfg, bool adapt) {
    ssp_is_update_impl(state, var_ep, w_var, cvar_ep, w_cvar, zeta1, zeta2, alpha, cfg,
                       adapt);
}

IsEstimate ssp_is_estimate(const SspModel& model, const SoftmaxPolicy& policy,
                           const RiskConfig& cfg, const IsConfig& is_cfg,
                           const PowerSchedule& zeta1, const PowerSchedule& zeta2,
                           long iterations, std::uint64_t seed, bool adapt,
                           int max_steps) {
    is_cfg.validate();
    IsState state;
    state.eta.assign(policy.dim(), 0.0);
    state.mu.assign(policy.dim(), 0.0);

    SoftmaxPolicy translated = policy;
    EpisodeTrace var_ep, cvar_ep;
    Welford increments;
    double weight_sum = 0.0;
    long violations = 0;
    for (long n = 1; n <= iterations; ++n) {
        for (int i = 0; i < policy.dim(); ++i)
            translated.theta()[i] = policy.theta()[i] + state.eta[i];
        RandomStream var_rng = RandomStream::derive(seed, n, 1);
        simulate_episode(model, translated, var_rng, var_ep, max_steps);
        const double w_var = ssp_is_weight(var_ep, policy, state.eta);

        for (int i = 0; i < policy.dim(); ++i)
            translated.theta()[i] = policy.theta()[i] + state.mu[i];
        RandomStream cvar_rng = RandomStream::derive(seed, n, 2);
        simulate_episode(model, translated, cvar_rng, cvar_ep, max_steps);
        const double w_cvar = ssp_is_weight(cvar_ep, policy, state.mu);

        const IsStepInfo info = ssp_is_update_impl(
            state, var_ep, w_var, cvar_ep, w_cvar, zeta1(n), zeta2(n), cfg.alpha,
            is_cfg, adapt);
        weight_sum += info.var_weight;
        if (n > iterations / 2) increments.add(info.xi_increment);
        if (n > 100) {
            const double excess = std::max(cvar_ep.total_c - state.xi, 0.0);
            if (excess > std::pow(growth_w(cvar_ep.total_c), is_cfg.growth_c))
                ++violations;
        }
    }
    IsEstimate out;
    out.xi = state.xi;
    out.psi = state.psi;
    out.eta = state.eta;
    out.mu = state.mu;
    out.weight_mean = iterations > 0 ? weight_sum / static_cast<double>(iterations) : 1.0;
    out.xi_increment_variance = increments.variance();
    out.growth_check_violations = violations;
    return out;
}

}  // namespace cvarssp

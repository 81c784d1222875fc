#include "cvarssp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace cvarssp {

namespace {

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> resolve_translation(const std::vector<double>& init, int dim,
                                        const char* name) {
    if (init.empty()) return std::vector<double>(dim, 0.0);
    if (static_cast<int>(init.size()) != dim)
        throw std::invalid_argument(std::string(name) +
                                    " must match the policy parameter dimension");
    return init;
}

void set_translated(SoftmaxPolicy& dst, const SoftmaxPolicy& base,
                    std::span<const double> shift) {
    dst = base;
    auto& theta = dst.theta();
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += shift[i];
}

void check_common(const RiskConfig& cfg, std::int64_t iterations,
                  const RunOptions& options) {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!std::isfinite(cfg.k_alpha))
        throw std::invalid_argument("k_alpha must be finite");
    if (!(options.lambda_max >= 0.0) || !std::isfinite(options.lambda_max))
        throw std::invalid_argument("lambda_max must be finite and >= 0");
    if (!(options.lambda0 >= 0.0 && options.lambda0 <= options.lambda_max))
        throw std::invalid_argument("lambda0 must lie in [0, lambda_max]");
    if (options.workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (options.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
}

}  // namespace

long MiniBatchPlan::batch_size(std::int64_t n) const {
    const double raw = std::ceil(coeff * std::pow(static_cast<double>(n), exponent));
    return std::max(1L, static_cast<long>(raw));
}

void MiniBatchPlan::validate(std::int64_t iterations) const {
    if (!(coeff > 0.0) || !std::isfinite(coeff))
        throw std::invalid_argument("batch coefficient must be finite and > 0");
    if (!(exponent > 0.0) || !std::isfinite(exponent))
        throw std::invalid_argument("batch exponent must be > 0");
    if (!weights.empty()) {
        if (static_cast<std::int64_t>(weights.size()) < iterations)
            throw std::invalid_argument("averaging weights shorter than the run");
        double sum = 0.0;
        for (std::int64_t k = 0; k < iterations; ++k) {
            const double a = weights[static_cast<std::size_t>(k)];
            if (!(a >= 0.0) || !std::isfinite(a))
                throw std::invalid_argument("averaging weights must be finite and >= 0");
            sum += a;
        }
        if (sum <= 0.0)
            throw std::invalid_argument("averaging weights must not all be zero");
    }
}

std::vector<double> objective_gradient_estimate(const EpisodeTrace& trace,
                                                OptimizerState& state, GradMode mode,
                                                double gamma) {
    double total = trace.total_g;
    if (mode == GradMode::PaperSmoothed) {
        if (!state.g_seeded) {
            state.g_bar = total;
            state.g_seeded = true;
        } else {
            state.g_bar += gamma * (total - state.g_bar);
        }
        total = state.g_bar;
    }
    std::vector<double> out(trace.score_sum.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = total * trace.score_sum[i];
    return out;
}

std::vector<double> cvar_gradient_estimate(const EpisodeTrace& trace,
                                           OptimizerState& state, GradMode mode,
                                           CvarGradScaling scaling, double gamma,
                                           double alpha, double xi) {
    double total = trace.total_c;
    if (mode == GradMode::PaperSmoothed) {
        if (!state.c_seeded) {
            state.c_tilde = total;
            state.c_seeded = true;
        } else {
            state.c_tilde += gamma * (total - state.c_tilde);
        }
        total = state.c_tilde;
    }
    std::vector<double> out(trace.score_sum.size(), 0.0);
    if (trace.total_c >= xi) {
        double scale = total - xi;
        if (scaling == CvarGradScaling::Unconditional) scale /= 1.0 - alpha;
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = scale * trace.score_sum[i];
    }
    return out;
}

void policy_update(SoftmaxPolicy& policy, std::span<const double> dG,
                   std::span<const double> dC, double lambda, double gamma) {
    auto& theta = policy.theta();
    if (dG.size() != theta.size() || dC.size() != theta.size())
        throw std::invalid_argument("gradient dimension mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] -= gamma * (dG[i] + lambda * dC[i]);
        if (!std::isfinite(theta[i]))
            throw NonFiniteIterate("policy parameter became non-finite during update");
    }
}

double lambda_update(double lambda, double psi, double beta, const RiskConfig& cfg,
                     double lambda_max) {
    const double next = lambda + beta * (psi - cfg.k_alpha);
    if (!std::isfinite(next))
        throw NonFiniteIterate("multiplier became non-finite during update");
    return std::clamp(next, 0.0, lambda_max);
}

RunResult run_pg_cvar_sa(const SspModel& model, const SoftmaxPolicy& policy0,
                         const RiskConfig& cfg, const StepSizeSchedule& sched,
                         std::int64_t iterations, std::uint64_t seed,
                         const RunOptions& options) {
    check_common(cfg, iterations, options);
    const bool use_is = options.is_mode != IsMode::Off;
    const bool adapt = options.is_mode == IsMode::Adaptive;
    if (use_is) options.is.validate();

    RunResult result{policy0, policy0, 0.0, 0.0, 0.0, false, {}};
    SoftmaxPolicy& policy = result.final_policy;
    result.has_is = use_is;
    result.trace.reserve(static_cast<std::size_t>(iterations));

    OptimizerState state;
    state.lambda = options.lambda0;
    RiskEstimator risk(cfg.alpha);
    IsState is_state;
    SoftmaxPolicy translated = policy0;
    if (use_is) {
        is_state.eta = resolve_translation(options.eta0, policy.dim(), "eta0");
        is_state.mu = resolve_translation(options.mu0, policy.dim(), "mu0");
    }

    EpisodeTrace ep, var_ep, cvar_ep;
    for (std::int64_t n = 1; n <= iterations; ++n) {
        const double z1 = sched.zeta1(n);
        const double z2 = sched.zeta2(n);
        const double gamma = sched.gamma(n);
        const double beta = sched.beta(n);

        RandomStream grad_rng = RandomStream::derive(seed, static_cast<std::uint64_t>(n), 0);
        simulate_episode(model, policy, grad_rng, ep, options.max_steps);

        double xi, psi, w_var = 1.0, w_cvar = 1.0;
        if (use_is) {
            set_translated(translated, policy, is_state.eta);
            RandomStream var_rng =
                RandomStream::derive(seed, static_cast<std::uint64_t>(n), 1);
            simulate_episode(model, translated, var_rng, var_ep, options.max_steps);
            w_var = ssp_is_weight(var_ep, policy, is_state.eta);

            set_translated(translated, policy, is_state.mu);
            RandomStream cvar_rng =
                RandomStream::derive(seed, static_cast<std::uint64_t>(n), 2);
            simulate_episode(model, translated, cvar_rng, cvar_ep, options.max_steps);
            w_cvar = ssp_is_weight(cvar_ep, policy, is_state.mu);

            ssp_is_update(is_state, var_ep, w_var, cvar_ep, w_cvar, z1, z2, cfg.alpha,
                          options.is, adapt);
            xi = is_state.xi;
            psi = is_state.psi;
        } else {
            risk.observe(ep.total_c, z1, z2);
            xi = risk.xi();
            psi = risk.psi();
        }

        const std::vector<double> dG =
            objective_gradient_estimate(ep, state, options.grad_mode, gamma);
        const std::vector<double> dC = cvar_gradient_estimate(
            ep, state, options.grad_mode, options.scaling, gamma, cfg.alpha, xi);
        policy_update(policy, dG, dC, state.lambda, gamma);
        state.lambda = lambda_update(state.lambda, psi, beta, cfg, options.lambda_max);

        TraceRow row;
        row.n = n;
        row.xi = xi;
        row.psi = psi;
        row.lambda = state.lambda;
        row.g_value =
            options.grad_mode == GradMode::PaperSmoothed ? state.g_bar : ep.total_g;
        row.c_mean = ep.total_c;
        row.theta_norm = l2_norm(policy.theta());
        row.tau_mean = static_cast<double>(ep.tau);
        if (use_is) {
            row.eta_norm = l2_norm(is_state.eta);
            row.mu_norm = l2_norm(is_state.mu);
            row.weight_mean = 0.5 * (w_var + w_cvar);
        }
        result.trace.push_back(row);
    }

    result.averaged_policy = policy;
    result.lambda = state.lambda;
    result.xi = use_is ? is_state.xi : risk.xi();
    result.psi = use_is ? is_state.psi : risk.psi();
    return result;
}

namespace {

struct EpisodeStats {
    double g = 0.0;
    double c = 0.0;
    int tau = 0;
    std::vector<double> z;
};

/// Fills `batch[lo..hi)` deterministically from per-episode streams; any
/// worker split yields the same contents.
void simulate_range(const SspModel& model, const SoftmaxPolicy& policy,
                    std::uint64_t seed, std::int64_t n, long lo, long hi,
                    int max_steps, std::vector<EpisodeStats>& batch) {
    EpisodeTrace tr;
    for (long j = lo; j < hi; ++j) {
        RandomStream rng = RandomStream::derive(seed, static_cast<std::uint64_t>(n),
                                                static_cast<std::uint64_t>(j));
        simulate_episode(model, policy, rng, tr, max_steps);
        EpisodeStats& slot = batch[static_cast<std::size_t>(j)];
        slot.g = tr.total_g;
        slot.c = tr.total_c;
        slot.tau = tr.tau;
        slot.z = tr.score_sum;
    }
}

}  // namespace

RunResult run_pg_cvar_mb(const SspModel& model, const SoftmaxPolicy& policy0,
                         const RiskConfig& cfg, const StepSizeSchedule& sched,
                         const MiniBatchPlan& plan, std::int64_t iterations,
                         std::uint64_t seed, const RunOptions& options) {
    check_common(cfg, iterations, options);
    plan.validate(iterations);
    if (options.is_mode != IsMode::Off)
        throw std::invalid_argument(
            "importance sampling is only available in the online algorithm");

    RunResult result{policy0, policy0, 0.0, 0.0, 0.0, false, {}};
    SoftmaxPolicy& policy = result.final_policy;
    result.trace.reserve(static_cast<std::size_t>(iterations));

    OptimizerState state;
    state.lambda = options.lambda0;
    const int dim = policy.dim();
    std::vector<double> avg_acc(static_cast<std::size_t>(dim), 0.0);
    double weight_sum = 0.0;

    double xi = 0.0;
    bool xi_ready = false;
    double psi = 0.0;

    std::vector<EpisodeStats> batch;
    std::vector<double> costs;
    std::vector<double> dG(static_cast<std::size_t>(dim));
    std::vector<double> dC(static_cast<std::size_t>(dim));

    for (std::int64_t n = 1; n <= iterations; ++n) {
        const long m = plan.batch_size(n);
        batch.resize(static_cast<std::size_t>(m));

        const int workers =
            static_cast<int>(std::min<long>(options.workers, m));
        if (workers > 1 && m >= 32) {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
            pool.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w) {
                const long lo = m * w / workers;
                const long hi = m * (w + 1) / workers;
                pool.emplace_back([&, w, lo, hi] {
                    try {
                        simulate_range(model, policy, seed, n, lo, hi,
                                       options.max_steps, batch);
                    } catch (...) {
                        errors[static_cast<std::size_t>(w)] = std::current_exception();
                    }
                });
            }
            for (auto& t : pool) t.join();
            for (const auto& err : errors)
                if (err) std::rethrow_exception(err);
        } else {
            simulate_range(model, policy, seed, n, 0, m, options.max_steps, batch);
        }

        costs.resize(static_cast<std::size_t>(m));
        for (long j = 0; j < m; ++j) costs[static_cast<std::size_t>(j)] = batch[static_cast<std::size_t>(j)].c;

        const double xi_prev = xi_ready ? xi : batch_var(costs, cfg.alpha);
        psi = batch_cvar(costs, xi_prev, cfg.alpha);
        switch (options.mb_var_mode) {
            case MbVarMode::Quantile:
                xi = batch_var(costs, cfg.alpha);
                break;
            case MbVarMode::SubgradientAverage:
                xi = batch_var_subgradient(costs, xi_prev, cfg.alpha);
                break;
            case MbVarMode::RobbinsMonro:
                xi = xi_prev -
                     options.mb_rm_step(n) * batch_var_subgradient(costs, xi_prev, cfg.alpha);
                break;
        }
        xi_ready = true;

        double g_mean = 0.0, c_mean = 0.0, tau_mean = 0.0;
        for (long j = 0; j < m; ++j) {
            const EpisodeStats& s = batch[static_cast<std::size_t>(j)];
            g_mean += s.g;
            c_mean += s.c;
            tau_mean += static_cast<double>(s.tau);
        }
        const double inv_m = 1.0 / static_cast<double>(m);
        g_mean *= inv_m;
        c_mean *= inv_m;
        tau_mean *= inv_m;

        const double tail_scale =
            options.scaling == CvarGradScaling::Unconditional ? 1.0 / (1.0 - cfg.alpha)
                                                              : 1.0;
        std::fill(dG.begin(), dG.end(), 0.0);
        std::fill(dC.begin(), dC.end(), 0.0);
        if (options.mb_grad_form == MbGradForm::PerEpisodeMean) {
            for (long j = 0; j < m; ++j) {
                const EpisodeStats& s = batch[static_cast<std::size_t>(j)];
                for (int i = 0; i < dim; ++i)
                    dG[static_cast<std::size_t>(i)] += s.g * s.z[static_cast<std::size_t>(i)];
                if (s.c >= xi) {
                    const double excess = s.c - xi;
                    for (int i = 0; i < dim; ++i)
                        dC[static_cast<std::size_t>(i)] += excess * s.z[static_cast<std::size_t>(i)];
                }
            }
            for (int i = 0; i < dim; ++i) {
                dG[static_cast<std::size_t>(i)] *= inv_m;
                dC[static_cast<std::size_t>(i)] *= inv_m * tail_scale;
            }
        } else {
            std::vector<double> z_mean(static_cast<std::size_t>(dim), 0.0);
            for (long j = 0; j < m; ++j) {
                const EpisodeStats& s = batch[static_cast<std::size_t>(j)];
                for (int i = 0; i < dim; ++i)
                    z_mean[static_cast<std::size_t>(i)] += s.z[static_cast<std::size_t>(i)];
            }
            for (int i = 0; i < dim; ++i) z_mean[static_cast<std::size_t>(i)] *= inv_m;
            for (int i = 0; i < dim; ++i)
                dG[static_cast<std::size_t>(i)] = g_mean * z_mean[static_cast<std::size_t>(i)];
            if (c_mean >= xi) {
                const double excess = (c_mean - xi) * tail_scale;
                for (int i = 0; i < dim; ++i)
                    dC[static_cast<std::size_t>(i)] = excess * z_mean[static_cast<std::size_t>(i)];
            }
        }

        policy_update(policy, dG, dC, state.lambda, sched.gamma(n));
        state.lambda =
            lambda_update(state.lambda, psi, sched.beta(n), cfg, options.lambda_max);

        const double a =
            plan.weights.empty() ? 1.0 : plan.weights[static_cast<std::size_t>(n - 1)];
        const auto& theta = policy.theta();
        for (int i = 0; i < dim; ++i)
            avg_acc[static_cast<std::size_t>(i)] += a * theta[static_cast<std::size_t>(i)];
        weight_sum += a;

        TraceRow row;
        row.n = n;
        row.xi = xi;
        row.psi = psi;
        row.lambda = state.lambda;
        row.g_value = g_mean;
        row.c_mean = c_mean;
        row.theta_norm = l2_norm(theta);
        row.tau_mean = tau_mean;
        result.trace.push_back(row);
    }

    result.averaged_policy = policy;
    if (weight_sum > 0.0) {
        auto& avg_theta = result.averaged_policy.theta();
        for (int i = 0; i < dim; ++i)
            avg_theta[static_cast<std::size_t>(i)] =
                avg_acc[static_cast<std::size_t>(i)] / weight_sum;
    }
    result.lambda = state.lambda;
    result.xi = xi;
    result.psi = psi;
    return result;
}

}  // namespace cvarssp

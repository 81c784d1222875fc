// Acceptance gate: eight end-to-end checks of the library and the CLI.
// Every tolerance is pinned here; each check prints exactly one PASS/FAIL
// line and the process exits nonzero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cvarssp/environments.hpp"
#include "cvarssp/importance_sampling.hpp"
#include "cvarssp/optimizer.hpp"
#include "cvarssp/oracle.hpp"
#include "cvarssp/risk.hpp"
#include "cvarssp/rng.hpp"
#include "cvarssp/schedule.hpp"
#include "cvarssp/simulate.hpp"

namespace fs = std::filesystem;
using namespace cvarssp;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome {
    bool ok = true;
    std::string detail;
};

struct EnvCase {
    std::string name;
    SspModel model;
    int horizon;
};

std::vector<EnvCase> standard_envs() {
    std::vector<EnvCase> envs;
    envs.push_back({"bandit-ssp", make_bandit_ssp(), 6});
    envs.push_back({"chain", make_chain(), 64});
    envs.push_back({"gridworld-trap", make_gridworld_trap(), 10});
    return envs;
}

std::vector<double> random_theta(int dim, RandomStream& rs) {
    std::vector<double> t(static_cast<std::size_t>(dim));
    for (auto& v : t) v = 2.0 * rs.uniform01() - 1.0;
    return t;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// 1. Grid minimization of the convex tail objective agrees with the
//    enumerated VaR/CVaR on every built-in model.

Outcome check_grid_minimization() {
    const auto t0 = Clock::now();
    const double grid_step = 1e-3;
    bool ok = true;
    double worst_var_gap = 0.0, worst_val_gap = 0.0;

    RandomStream rs(8101);
    for (const auto& env : standard_envs()) {
        SoftmaxPolicy policy = SoftmaxPolicy::tabular(env.model.actions);
        for (int rep = 0; rep < 3; ++rep) {
            policy.theta() = random_theta(policy.dim(), rs);
            const EnumerationResult er =
                enumerate_cost_distribution(env.model, policy, env.horizon, 1e-9);
            for (const double alpha : {0.9, 0.95}) {
                const auto [var_star, cvar_star] = exact_var_cvar(er.cost, alpha);
                const double lo = er.cost.atoms.front().value;
                const double hi = er.cost.atoms.back().value;
                std::vector<double> grid;
                const long n_steps =
                    static_cast<long>(std::ceil((hi - lo) / grid_step)) + 1;
                grid.reserve(static_cast<std::size_t>(n_steps) +
                             er.cost.atoms.size());
                for (long k = 0; k < n_steps; ++k)
                    grid.push_back(lo + grid_step * static_cast<double>(k));
                for (const auto& a : er.cost.atoms) grid.push_back(a.value);

                double best_xi = grid.front();
                double best_v = ru_objective(er.cost, grid.front(), alpha);
                for (const double xi : grid) {
                    const double v = ru_objective(er.cost, xi, alpha);
                    if (v < best_v) {
                        best_v = v;
                        best_xi = xi;
                    }
                }
                const double var_gap = std::abs(best_xi - var_star);
                const double val_gap = std::abs(best_v - cvar_star);
                worst_var_gap = std::max(worst_var_gap, var_gap);
                worst_val_gap = std::max(worst_val_gap, val_gap);
                ok = ok && var_gap <= grid_step + 1e-9 && val_gap <= 1e-3;
            }
        }
    }
    const double el = seconds_since(t0);
    ok = ok && el < 10.0;
    return {ok, fmt("max VaR gap %.2e, max value gap %.2e, %.1f s", worst_var_gap,
                    worst_val_gap, el)};
}

// ---------------------------------------------------------------------------
// 2. The online quantile/tail trackers converge at fixed policies.

Outcome check_quantile_tracking() {
    struct Fixture {
        EnvCase env;
        std::vector<double> theta;
    };
    // the two-armed fixture keeps its risky arm unlikely; with a fat risky
    // arm the averaging iterate's stationary noise at these step sizes is
    // wider than the tolerance band
    auto envs = standard_envs();
    std::vector<Fixture> fixtures;
    fixtures.push_back({envs[0], {2.5, -2.5, 0.0}});
    fixtures.push_back({envs[1], std::vector<double>(8, 0.0)});
    fixtures.push_back({envs[2], std::vector<double>(32, 0.0)});

    const StepSizeSchedule sched = StepSizeSchedule::defaults();
    const long episodes = 100000;
    bool ok = true;
    int min_passes = 10;
    double max_env_seconds = 0.0;

    for (std::size_t f = 0; f < fixtures.size(); ++f) {
        const auto t_env = Clock::now();
        const auto& fx = fixtures[f];
        SoftmaxPolicy policy = SoftmaxPolicy::tabular(fx.env.model.actions);
        policy.theta() = fx.theta;
        const EnumerationResult er = enumerate_cost_distribution(
            fx.env.model, policy, fx.env.horizon, 1e-9);
        const double spread =
            er.cost.atoms.back().value - er.cost.atoms.front().value;
        const double tol = 0.02 * spread;

        for (const double alpha : {0.9, 0.95}) {
            const auto [var_star, cvar_star] = exact_var_cvar(er.cost, alpha);
            int passes = 0;
            for (std::uint64_t seed = 1; seed <= 10; ++seed) {
                RiskEstimator est(alpha);
                RandomStream rs = RandomStream::derive(
                    4300 + f, static_cast<std::uint64_t>(alpha * 100), seed);
                EpisodeTrace ep;
                for (long n = 1; n <= episodes; ++n) {
                    simulate_episode(fx.env.model, policy, rs, ep);
                    est.observe(ep.total_c, sched.zeta1(n), sched.zeta2(n));
                }
                if (std::abs(est.xi() - var_star) <= tol &&
                    std::abs(est.psi() - cvar_star) <= tol)
                    ++passes;
            }
            min_passes = std::min(min_passes, passes);
            ok = ok && passes >= 9;
        }
        const double el = seconds_since(t_env);
        max_env_seconds = std::max(max_env_seconds, el);
        ok = ok && el < 60.0;
    }
    return {ok, fmt("min %d/10 seeds in tolerance, slowest model %.1f s",
                    min_passes, max_env_seconds)};
}

// ---------------------------------------------------------------------------
// 3. Likelihood-ratio gradient estimates agree with central finite
//    differences of the enumerated objective and tail risk.

Outcome check_gradient_estimators() {
    const auto t0 = Clock::now();
    const double alpha = 0.95;
    const double h = 1e-4;
    const long episodes = 1000000;
    bool ok = true;
    double worst_sigma = 0.0;

    auto envs = standard_envs();
    std::vector<EnvCase> cases = {envs[0], envs[1]};
    RandomStream rs_theta(5150);

    for (std::size_t e = 0; e < cases.size(); ++e) {
        const auto& env = cases[e];
        SoftmaxPolicy policy = SoftmaxPolicy::tabular(env.model.actions);
        const int dim = policy.dim();

        for (int rep = 0; rep < 5; ++rep) {
            // keep redrawing until the tail quantile sits on the same atom
            // for every finite-difference perturbation, so the comparison
            // below is against a locally smooth target
            std::vector<double> theta;
            double var_star = 0.0;
            bool stable = false;
            for (int attempt = 0; attempt < 80 && !stable; ++attempt) {
                theta = random_theta(dim, rs_theta);
                policy.theta() = theta;
                const auto base = exact_var_cvar(
                    enumerate_cost_distribution(env.model, policy, env.horizon,
                                                1e-9)
                        .cost,
                    alpha);
                var_star = base.first;
                stable = true;
                for (int i = 0; i < dim && stable; ++i) {
                    for (const double sign : {-1.0, 1.0}) {
                        policy.theta()[static_cast<std::size_t>(i)] =
                            theta[static_cast<std::size_t>(i)] + sign * h;
                        const auto pert = exact_var_cvar(
                            enumerate_cost_distribution(env.model, policy,
                                                        env.horizon, 1e-9)
                                .cost,
                            alpha);
                        if (std::abs(pert.first - var_star) > 1e-9) {
                            stable = false;
                            break;
                        }
                    }
                    policy.theta() = theta;
                }
                policy.theta() = theta;
            }

            const std::vector<double> fd_g = finite_difference_gradient(
                env.model, policy, OracleQuantity::MeanG, alpha, env.horizon,
                1e-9, h);
            const std::vector<double> fd_c = finite_difference_gradient(
                env.model, policy, OracleQuantity::CvarC, alpha, env.horizon,
                1e-9, h);

            std::vector<double> sum_g(static_cast<std::size_t>(dim), 0.0);
            std::vector<double> sq_g(static_cast<std::size_t>(dim), 0.0);
            std::vector<double> sum_c(static_cast<std::size_t>(dim), 0.0);
            std::vector<double> sq_c(static_cast<std::size_t>(dim), 0.0);
            const double inv_tail = 1.0 / (1.0 - alpha);

            RandomStream rs = RandomStream::derive(6200, e, static_cast<std::uint64_t>(rep));
            EpisodeTrace ep;
            for (long n = 0; n < episodes; ++n) {
                simulate_episode(env.model, policy, rs, ep);
                const double excess = ep.total_c - var_star;
                const double tail_f = excess >= 0.0 ? excess * inv_tail : 0.0;
                for (int i = 0; i < dim; ++i) {
                    const double z = ep.score_sum[static_cast<std::size_t>(i)];
                    const double gi = ep.total_g * z;
                    const double ci = tail_f * z;
                    sum_g[static_cast<std::size_t>(i)] += gi;
                    sq_g[static_cast<std::size_t>(i)] += gi * gi;
                    sum_c[static_cast<std::size_t>(i)] += ci;
                    sq_c[static_cast<std::size_t>(i)] += ci * ci;
                }
            }

            const double n = static_cast<double>(episodes);
            for (int i = 0; i < dim; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                const double mg = sum_g[idx] / n;
                const double vg =
                    std::max(0.0, sq_g[idx] / n - mg * mg) * n / (n - 1.0);
                const double se_g = std::sqrt(vg / n);
                const double mc = sum_c[idx] / n;
                const double vc =
                    std::max(0.0, sq_c[idx] / n - mc * mc) * n / (n - 1.0);
                const double se_c = std::sqrt(vc / n);

                const double gap_g = std::abs(mg - fd_g[idx]);
                const double gap_c = std::abs(mc - fd_c[idx]);
                ok = ok && gap_g <= 3.0 * se_g + 1e-9;
                ok = ok && gap_c <= 3.0 * se_c + 1e-9;
                if (se_g > 0.0) worst_sigma = std::max(worst_sigma, gap_g / se_g);
                if (se_c > 0.0) worst_sigma = std::max(worst_sigma, gap_c / se_c);
            }
        }
    }
    const double el = seconds_since(t0);
    ok = ok && el < 300.0;
    return {ok, fmt("worst deviation %.2f standard errors, %.1f s", worst_sigma, el)};
}

// ---------------------------------------------------------------------------
// 4/5 shared helpers on the two-armed model.

struct BanditEval {
    double p0 = 0.0;
    double cvar = 0.0;
    double mean_g = 0.0;
};

BanditEval eval_bandit(const SspModel& model, const SoftmaxPolicy& policy,
                       double alpha) {
    const EnumerationResult er =
        enumerate_cost_distribution(model, policy, 6, 1e-9);
    const auto vc = exact_var_cvar(er.cost, alpha);
    return {policy.action_probabilities(1)[0], vc.second, er.mean_g};
}

double bandit_unconstrained_optimum(const SspModel& model) {
    SoftmaxPolicy policy = SoftmaxPolicy::tabular(model.actions);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -24; i <= 24; ++i) {
        for (int j = -24; j <= 24; ++j) {
            policy.theta() = {0.25 * i, 0.25 * j, 0.0};
            best = std::min(
                best,
                enumerate_cost_distribution(model, policy, 6, 1e-9).mean_g);
        }
    }
    return best;
}

Outcome check_online_end_to_end() {
    const auto t0 = Clock::now();
    const SspModel model = make_bandit_ssp();
    const StepSizeSchedule sched = StepSizeSchedule::defaults();
    const std::int64_t iterations = 200000;
    RunOptions opts;
    opts.lambda_max = 100.0;
    const double g_opt = bandit_unconstrained_optimum(model);

    int pass_tight = 0, pass_slack = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RunResult tight = run_pg_cvar_sa(
            model, SoftmaxPolicy::tabular(model.actions), RiskConfig{0.95, 5.0},
            sched, iterations, seed, opts);
        const BanditEval et = eval_bandit(model, tight.final_policy, 0.95);
        if (et.p0 >= 0.99 && et.cvar <= 5.5) ++pass_tight;

        const RunResult slack = run_pg_cvar_sa(
            model, SoftmaxPolicy::tabular(model.actions), RiskConfig{0.95, 25.0},
            sched, iterations, seed, opts);
        const BanditEval es = eval_bandit(model, slack.final_policy, 0.95);
        if (slack.lambda <= 0.1 && es.mean_g <= g_opt + 0.05) ++pass_slack;
    }
    const bool ok = pass_tight >= 8 && pass_slack >= 8;
    return {ok, fmt("constrained %d/10, slack %d/10 (best objective %.4f), %.1f s",
                    pass_tight, pass_slack, g_opt, seconds_since(t0))};
}

Outcome check_minibatch_end_to_end() {
    const auto t0 = Clock::now();
    const SspModel model = make_bandit_ssp();
    // a gentle multiplier coefficient rides out the noisy risk surrogate of
    // the first few small batches, which under the default schedule whips
    // the multiplier high enough to park the policy in the safe corner
    const StepSizeSchedule sched(
        PowerSchedule{1.0, 0.55}, PowerSchedule{1.0, 0.7},
        PowerSchedule{1.0, 0.85}, PowerSchedule{0.02, 1.0});
    const std::int64_t iterations = 5000;
    MiniBatchPlan plan;
    plan.coeff = 5.0;
    plan.exponent = 0.6;  // batch m_n grows as ceil(5 n^0.6)
    RunOptions opts;
    opts.lambda_max = 100.0;
    const double g_opt = bandit_unconstrained_optimum(model);

    int pass_tight = 0, pass_slack = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RunResult tight = run_pg_cvar_mb(
            model, SoftmaxPolicy::tabular(model.actions), RiskConfig{0.95, 5.0},
            sched, plan, iterations, seed, opts);
        const BanditEval et = eval_bandit(model, tight.final_policy, 0.95);
        const BanditEval ea = eval_bandit(model, tight.averaged_policy, 0.95);
        if (et.p0 >= 0.99 && et.cvar <= 5.5 && ea.cvar <= 5.5) ++pass_tight;

        const RunResult slack = run_pg_cvar_mb(
            model, SoftmaxPolicy::tabular(model.actions), RiskConfig{0.95, 25.0},
            sched, plan, iterations, seed, opts);
        const BanditEval es = eval_bandit(model, slack.final_policy, 0.95);
        if (slack.lambda <= 0.1 && es.mean_g <= g_opt + 0.05) ++pass_slack;
    }
    const bool ok = pass_tight >= 8 && pass_slack >= 8;
    return {ok, fmt("constrained %d/10, slack %d/10, %.1f s", pass_tight,
                    pass_slack, seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 6. Translated sampling on the standard Gaussian: point accuracy at a
//    moderate level, variance reduction at an extreme one.

Outcome check_continuous_translation() {
    const auto t0 = Clock::now();
    const GaussianDensity gauss = GaussianDensity::standard(1);

    const double var_target = 1.6449;
    const double cvar_target = 2.0627;
    IsConfig cfg;
    cfg.rho = 0.25;
    const IsEstimate point = estimate_continuous(
        gauss, 0.95, cfg, PowerSchedule{1.0, 0.85}, PowerSchedule{1.0, 0.7},
        1000000, 424242, true);
    const double xi_gap = std::abs(point.xi - var_target);
    const double psi_gap = std::abs(point.psi - cvar_target);
    bool ok = xi_gap <= 0.01 * var_target && psi_gap <= 0.01 * cvar_target;

    // Tail events at alpha = 0.999 are too rare for the translations to
    // self-start, so the adaptive arm tempers its gates with a boost down to
    // the 0.9 level.  rho = 0.5 cancels the Gaussian kernel and growth_c = 2
    // tames the quadratic update; small zeta1 keeps the seeding kick of the
    // quantile iterate burnable within the run.
    IsConfig deep;
    deep.rho = 0.5;
    deep.growth_c = 2.0;
    deep.alpha_boost = 100.0;
    std::vector<double> adaptive_psi, plain_psi;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        adaptive_psi.push_back(
            estimate_continuous(gauss, 0.999, deep, PowerSchedule{0.002, 0.55},
                                PowerSchedule{0.05, 0.7}, 1000000, 777000 + seed,
                                true)
                .psi);
        plain_psi.push_back(
            estimate_continuous(gauss, 0.999, deep, PowerSchedule{0.002, 0.55},
                                PowerSchedule{0.05, 0.7}, 1000000, 777000 + seed,
                                false)
                .psi);
    }
    const double var_adaptive = sample_variance(adaptive_psi);
    const double var_plain = sample_variance(plain_psi);
    ok = ok && var_adaptive <= 0.8 * var_plain;

    return {ok, fmt("gaps (%.4f, %.4f), deep-tail variance ratio %.3f, %.1f s",
                    xi_gap, psi_gap,
                    var_plain > 0.0 ? var_adaptive / var_plain : 0.0,
                    seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 7. Policy-ratio weighting on episodic models: reweighted tail
//    probabilities are unbiased, and the fixed-translation recursions agree
//    with the plain trackers.

struct TailProbeResult {
    double gap = 0.0;
    double se = 0.0;
    bool ok = false;
};

TailProbeResult weighted_tail_probe(const SspModel& model,
                                    const std::vector<double>& base_theta,
                                    const std::vector<double>& translation,
                                    double threshold, int horizon,
                                    std::uint64_t seed) {
    SoftmaxPolicy base = SoftmaxPolicy::tabular(model.actions);
    base.theta() = base_theta;
    const EnumerationResult er =
        enumerate_cost_distribution(model, base, horizon, 1e-9);
    double truth = 0.0;
    for (const auto& a : er.cost.atoms)
        if (a.value >= threshold) truth += a.prob;

    SoftmaxPolicy behavior = base;
    for (std::size_t i = 0; i < translation.size(); ++i)
        behavior.theta()[i] += translation[i];

    const long episodes = 200000;
    double sum = 0.0, sq = 0.0;
    RandomStream rs = RandomStream::derive(8803, seed, 0);
    EpisodeTrace ep;
    for (long n = 0; n < episodes; ++n) {
        simulate_episode(model, behavior, rs, ep);
        const double w = ssp_is_weight(ep, base, translation);
        const double x = ep.total_c >= threshold ? w : 0.0;
        sum += x;
        sq += x * x;
    }
    const double nn = static_cast<double>(episodes);
    const double mean = sum / nn;
    const double var = std::max(0.0, sq / nn - mean * mean) * nn / (nn - 1.0);
    const double se = std::sqrt(var / nn);
    TailProbeResult r;
    r.gap = std::abs(mean - truth);
    r.se = se;
    r.ok = r.gap <= 3.0 * se + 1e-12;
    return r;
}

struct ArmSummary {
    std::vector<double> xi, psi;
};

Outcome check_policy_ratio_weighting() {
    const auto t0 = Clock::now();
    bool ok = true;
    double worst_sigma = 0.0;

    // unbiasedness of the reweighted tail indicator
    {
        const TailProbeResult bandit = weighted_tail_probe(
            make_bandit_ssp(), {0.0, 0.0, 0.0}, {-1.0, 1.0, 0.0}, 19.5, 6, 1);
        ok = ok && bandit.ok;
        if (bandit.se > 0.0)
            worst_sigma = std::max(worst_sigma, bandit.gap / bandit.se);

        std::vector<double> chain_shift(8, 0.0);
        for (int s = 0; s < 4; ++s) chain_shift[static_cast<std::size_t>(2 * s + 1)] = 0.7;
        const TailProbeResult chain = weighted_tail_probe(
            make_chain(), std::vector<double>(8, 0.0), chain_shift, 6.25, 64, 2);
        ok = ok && chain.ok;
        if (chain.se > 0.0)
            worst_sigma = std::max(worst_sigma, chain.gap / chain.se);
    }

    // with adaptation off and a fixed translation, the recursions estimate
    // the same quantities as the plain trackers
    struct FixedCase {
        SspModel model;
        std::vector<double> theta;
        std::vector<double> translation;
        double alpha;
    };
    // both fixtures ride the chain, whose cost support is spread enough for
    // the finite-run oscillation of the two arms to stay comparable; a policy
    // whose tail mass sits on one isolated cost atom pins both trackers to
    // the atom and turns their tiny estimator-specific offsets into a huge
    // normalized gap
    std::vector<FixedCase> cases;
    {
        std::vector<double> shift(8, 0.0);
        for (int s = 0; s < 4; ++s) shift[static_cast<std::size_t>(2 * s + 1)] = -0.4;
        cases.push_back({make_chain(), std::vector<double>(8, 0.0), shift, 0.95});
    }
    {
        std::vector<double> shift(8, 0.0);
        for (int s = 0; s < 4; ++s) shift[static_cast<std::size_t>(2 * s + 1)] = 0.5;
        cases.push_back({make_chain(), std::vector<double>(8, 0.0), shift, 0.9});
    }

    const StepSizeSchedule sched = StepSizeSchedule::defaults();
    const long iterations = 30000;
    const int n_seeds = 10;
    IsConfig cfg;

    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& fc = cases[ci];
        SoftmaxPolicy base = SoftmaxPolicy::tabular(fc.model.actions);
        base.theta() = fc.theta;
        SoftmaxPolicy shifted = base;
        for (std::size_t i = 0; i < fc.translation.size(); ++i)
            shifted.theta()[i] += fc.translation[i];

        ArmSummary weighted, plain;
        for (int s = 0; s < n_seeds; ++s) {
            IsState st;
            st.eta = fc.translation;
            st.mu = fc.translation;
            EpisodeTrace ep_var, ep_cvar;
            const std::uint64_t seed_w = 5600 + 100 * ci + static_cast<std::uint64_t>(s);
            for (long n = 1; n <= iterations; ++n) {
                RandomStream r1 = RandomStream::derive(seed_w, static_cast<std::uint64_t>(n), 1);
                simulate_episode(fc.model, shifted, r1, ep_var);
                const double w1 = ssp_is_weight(ep_var, base, fc.translation);
                RandomStream r2 = RandomStream::derive(seed_w, static_cast<std::uint64_t>(n), 2);
                simulate_episode(fc.model, shifted, r2, ep_cvar);
                const double w2 = ssp_is_weight(ep_cvar, base, fc.translation);
                ssp_is_update(st, ep_var, w1, ep_cvar, w2, sched.zeta1(n),
                              sched.zeta2(n), fc.alpha, cfg, false);
            }
            weighted.xi.push_back(st.xi);
            weighted.psi.push_back(st.psi);

            RiskEstimator est(fc.alpha);
            EpisodeTrace ep;
            const std::uint64_t seed_p = 9900 + 100 * ci + static_cast<std::uint64_t>(s);
            for (long n = 1; n <= iterations; ++n) {
                RandomStream r = RandomStream::derive(seed_p, static_cast<std::uint64_t>(n), 1);
                simulate_episode(fc.model, base, r, ep);
                est.observe(ep.total_c, sched.zeta1(n), sched.zeta2(n));
            }
            plain.xi.push_back(est.xi());
            plain.psi.push_back(est.psi());
        }

        auto two_sample = [&](const std::vector<double>& a,
                              const std::vector<double>& b) {
            const double gap = std::abs(mean_of(a) - mean_of(b));
            const double se = std::sqrt(sample_variance(a) / a.size() +
                                        sample_variance(b) / b.size());
            if (se > 0.0) worst_sigma = std::max(worst_sigma, gap / se);
            return gap <= 3.0 * se + 1e-12;
        };
        ok = ok && two_sample(weighted.xi, plain.xi);
        ok = ok && two_sample(weighted.psi, plain.psi);
    }

    return {ok, fmt("worst deviation %.2f standard errors, %.1f s", worst_sigma,
                    seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// 8. Every CLI run is byte-identical under a repeated seed, the worker
//    count does not change the trajectory, and the output override works.

Outcome check_cli_determinism() {
    const auto t0 = Clock::now();
    const char* cli = CVAR_SSP_CLI_PATH;
    const fs::path root = fs::temp_directory_path() / "cvarssp_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);

    auto run_cli = [&](const std::string& args, const std::string& env_prefix) {
        const std::string cmd =
            env_prefix + "\"" + std::string(cli) + "\" " + args + " >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    auto outputs = [&](const fs::path& dir) {
        return std::pair(slurp(dir / "trace.csv"), slurp(dir / "summary.json"));
    };

    bool ok = true;
    std::string why = "all runs replayed byte for byte";
    int repeated = 0;

    struct CliCase {
        const char* label;
        std::string args;
    };
    std::vector<CliCase> cases = {
        {"sa", "--env bandit-ssp --algo sa --alpha 0.95 --k-alpha 5 "
               "--iters 400 --seed 42"},
        {"mb8", "--env chain --algo mb --alpha 0.9 --k-alpha 6 --iters 40 "
                "--seed 7 --workers 8"},
        {"is", "--env bandit-ssp --algo sa --alpha 0.95 --k-alpha 0 "
               "--iters 300 --seed 9 --is adaptive --is-rho 0.5"},
    };

    for (const auto& c : cases) {
        const fs::path dir = root / c.label;
        const std::string args = c.args + " --out \"" + dir.string() + "\"";
        if (!run_cli(args, "")) {
            ok = false;
            why = fmt("run '%s' failed", c.label);
            break;
        }
        const auto first = outputs(dir);
        if (first.first.empty() || first.second.empty()) {
            ok = false;
            why = fmt("run '%s' wrote no output", c.label);
            break;
        }
        if (!run_cli(args, "")) {
            ok = false;
            why = fmt("repeat of '%s' failed", c.label);
            break;
        }
        if (outputs(dir) != first) {
            ok = false;
            why = fmt("repeat of '%s' changed bytes", c.label);
            break;
        }
        ++repeated;
    }

    if (ok) {
        // the worker count may not change the trajectory
        const fs::path dir1 = root / "mb1";
        const std::string args =
            "--env chain --algo mb --alpha 0.9 --k-alpha 6 --iters 40 --seed 7 "
            "--workers 1 --out \"" + dir1.string() + "\"";
        if (!run_cli(args, "")) {
            ok = false;
            why = "single-worker rerun failed";
        } else if (slurp(dir1 / "trace.csv") != slurp(root / "mb8" / "trace.csv")) {
            ok = false;
            why = "worker count changed the trace";
        }
    }

    if (ok) {
        // CVAR_SSP_OUT overrides --out and yields the same bytes as asking
        // for that directory directly
        const fs::path ov = root / "override";
        const fs::path decoy = root / "decoy";
        const std::string args = "--env chain --algo sa --alpha 0.9 --k-alpha 4 "
                                 "--iters 200 --seed 13";
        const std::string env_prefix =
            "CVAR_SSP_OUT=\"" + ov.string() + "\" ";
        if (!run_cli(args + " --out \"" + decoy.string() + "\"", env_prefix)) {
            ok = false;
            why = "override run failed";
        } else if (fs::exists(decoy) || !fs::exists(ov / "trace.csv")) {
            ok = false;
            why = "override directory was not honored";
        } else {
            const auto via_env = outputs(ov);
            if (!run_cli(args + " --out \"" + ov.string() + "\"", "")) {
                ok = false;
                why = "direct rerun failed";
            } else if (outputs(ov) != via_env) {
                ok = false;
                why = "override bytes differ from a direct run";
            }
        }
    }

    fs::remove_all(root);
    return {ok, fmt("%s (%d cases repeated), %.1f s", why.c_str(), repeated,
                    seconds_since(t0))};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {"tail objective grid minimization", check_grid_minimization},
        {"online quantile and tail tracking", check_quantile_tracking},
        {"likelihood-ratio gradients vs finite differences", check_gradient_estimators},
        {"online constrained optimization", check_online_end_to_end},
        {"mini-batch constrained optimization", check_minibatch_end_to_end},
        {"translated sampling on the Gaussian", check_continuous_translation},
        {"policy-ratio weighting on episodic models", check_policy_ratio_weighting},
        {"CLI byte determinism", check_cli_determinism},
    };

    int failures = 0;
    int idx = 0;
    for (const auto& entry : entries) {
        ++idx;
        Outcome o;
        try {
            o = entry.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s [%d/8] %-50s %s\n", o.ok ? "PASS" : "FAIL", idx,
                    entry.name, o.detail.c_str());
        std::fflush(stdout);
        if (!o.ok) ++failures;
    }
    std::printf("%d/8 acceptance checks passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}

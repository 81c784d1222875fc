#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cvarssp/importance_sampling.hpp"
#include "cvarssp/model.hpp"
#include "cvarssp/policy.hpp"
#include "cvarssp/risk.hpp"
#include "cvarssp/schedule.hpp"
#include "cvarssp/simulate.hpp"

namespace cvarssp {

class NonFiniteIterate : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Objective/constraint gradient aggregation for the online algorithm.
/// PerEpisode uses the raw episode totals (unbiased likelihood-ratio form);
/// PaperSmoothed multiplies the score by an exponentially averaged total.
enum class GradMode { PerEpisode, PaperSmoothed };

/// Unconditional multiplies the tail term by 1/(1-alpha), matching the
/// CVaR gradient written as an unconditional expectation; Conditional omits
/// the factor, which rescales the effective multiplier.
enum class CvarGradScaling { Unconditional, Conditional };

/// Batch VaR rule of the mini-batch algorithm.  Quantile (default) takes
/// the ceil(alpha m)-th order statistic; SubgradientAverage is the printed
/// recursion read literally (the averaged subgradient value itself);
/// RobbinsMonro applies that average as a decaying step from the previous xi.
enum class MbVarMode { Quantile, SubgradientAverage, RobbinsMonro };

/// Mini-batch gradient aggregation.  PerEpisodeMean averages per-episode
/// products (the empirical-mean reading, default); AggregateProduct
/// multiplies batch means with the batch-mean score.
enum class MbGradForm { PerEpisodeMean, AggregateProduct };

enum class IsMode { Off, Fixed, Adaptive };

struct MiniBatchPlan {
    double coeff = 5.0;
    double exponent = 0.6;
    std::vector<double> weights;  // a_k for the averaged output; empty = all ones

    long batch_size(std::int64_t n) const;
    void validate(std::int64_t iterations) const;
};

struct RunOptions {
    GradMode grad_mode = GradMode::PerEpisode;
    CvarGradScaling scaling = CvarGradScaling::Unconditional;
    double lambda0 = 0.0;
    double lambda_max = 1000.0;
    int max_steps = kDefaultMaxSteps;
    int workers = 1;

    MbVarMode mb_var_mode = MbVarMode::Quantile;
    MbGradForm mb_grad_form = MbGradForm::PerEpisodeMean;
    PowerSchedule mb_rm_step{1.0, 0.55};  // only used by MbVarMode::RobbinsMonro

    IsMode is_mode = IsMode::Off;
    IsConfig is;
    std::vector<double> eta0, mu0;  // initial translations, empty = zero
};

/// Iterates shared by the gradient estimators.
struct OptimizerState {
    double lambda = 0.0;
    double g_bar = 0.0;    // smoothed objective total
    double c_tilde = 0.0;  // smoothed constraint total
    bool g_seeded = false;
    bool c_seeded = false;
};

/**
 * Estimate of grad_theta G from one episode.  PerEpisode returns G_n z_n;
 * PaperSmoothed first folds G_n into the exponential average g_bar with
 * step gamma (seeding it with the first sample) and returns g_bar z_n.
 */
std::vector<double> objective_gradient_estimate(const EpisodeTrace& trace,
                                                OptimizerState& state, GradMode mode,
                                                double gamma);

/**
 * Estimate of grad_theta CVaR from one episode given the current VaR
 * iterate xi: (total - xi) z_n 1{C_n >= xi}, with `total` either the raw
 * C_n (PerEpisode) or the smoothed c_tilde (PaperSmoothed).  Unconditional
 * scaling multiplies by 1/(1-alpha).
 */
std::vector<double> cvar_gradient_estimate(const EpisodeTrace& trace,
                                           OptimizerState& state, GradMode mode,
                                           CvarGradScaling scaling, double gamma,
                                           double alpha, double xi);

/// theta -= gamma (dG + lambda dC); aborts on non-finite components.
void policy_update(SoftmaxPolicy& policy, std::span<const double> dG,
                   std::span<const double> dC, double lambda, double gamma);

/// Projected ascent: clip(lambda + beta (psi - K_alpha), 0, lambda_max).
double lambda_update(double lambda, double psi, double beta, const RiskConfig& cfg,
                     double lambda_max);

struct TraceRow {
    std::int64_t n = 0;
    double xi = 0.0;
    double psi = 0.0;
    double lambda = 0.0;
    double g_value = 0.0;  // per-episode G, smoothed g_bar, or batch mean
    double c_mean = 0.0;
    double theta_norm = 0.0;
    double tau_mean = 0.0;
    double eta_norm = 0.0;
    double mu_norm = 0.0;
    double weight_mean = 1.0;
};

struct RunResult {
    SoftmaxPolicy final_policy;
    SoftmaxPolicy averaged_policy;  // weighted iterate average; == final for SA
    double lambda = 0.0;
    double xi = 0.0;
    double psi = 0.0;
    bool has_is = false;
    std::vector<TraceRow> trace;
};

/**
 * Online four-timescale run: per iteration one episode (three with IS
 * enabled: gradient, VaR, CVaR streams), coupled VaR/CVaR tracking, policy
 * descent and projected multiplier ascent.  Episode streams are keyed by
 * (seed, iteration, role), so runs are reproducible bit for bit.
 */
RunResult run_pg_cvar_sa(const SspModel& model, const SoftmaxPolicy& policy0,
                         const RiskConfig& cfg, const StepSizeSchedule& sched,
                         std::int64_t iterations, std::uint64_t seed,
                         const RunOptions& options);

/**
 * Mini-batch run: m_n = ceil(coeff n^exponent) episodes per iteration,
 * batch VaR/CVaR, batch-averaged gradients, and the weighted iterate
 * average as output.  Episodes within a batch may be simulated by several
 * workers; per-episode streams are keyed by (seed, iteration, episode) and
 * reductions run in index order, so the result is identical for any worker
 * count.  Only the gamma/beta schedules of `sched` are consulted.
 */
RunResult run_pg_cvar_mb(const SspModel& model, const SoftmaxPolicy& policy0,
                         const RiskConfig& cfg, const StepSizeSchedule& sched,
                         const MiniBatchPlan& plan, std::int64_t iterations,
                         std::uint64_t seed, const RunOptions& options);

}  // namespace cvarssp

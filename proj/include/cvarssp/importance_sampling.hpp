#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvarssp/model.hpp"
#include "cvarssp/policy.hpp"
#include "cvarssp/risk.hpp"
#include "cvarssp/rng.hpp"
#include "cvarssp/schedule.hpp"
#include "cvarssp/simulate.hpp"

namespace cvarssp {

/**
 * Knobs of the translation-based variance reduction.  The damping
 * e^(-rho |translation|^b) keeps adaptation increments sub-linear; the
 * growth function W(x) = 1 + |x| with exponent c controls the estimand.
 *
 * alpha_boost tempers the adaptation at extreme levels: with boost k > 1
 * the translation recursions gate against an auxiliary VaR tracker at the
 * easier level 1 - k(1-alpha), and the tempered subsystem (tracker and
 * translations) scales its steps by k, matching the k-times-richer event
 * rate there.  The xi/psi recursions are untouched and remain unbiased at
 * alpha for any translation, so the boost changes only how fast a useful
 * translation is found.  k = 1 is the plain scheme.  Large boosts pair
 * well with rho = 0.5 (for b = 2 the damping then cancels the Gaussian
 * kernel) and growth_c = 2, which bound the tempered increments.
 */
struct IsConfig {
    double rho = 1.0;         // > 0
    double b = 2.0;           // in [1, 2]
    double growth_c = 1.0;    // >= 1
    double alpha_boost = 1.0; // >= 1

    void validate() const;
};

inline double growth_w(double x) { return 1.0 + std::abs(x); }

class AbsoluteContinuityViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Density evaluator for the formula-faithful continuous recursions.
 * Works in log space; log_pdf of -inf at a point required by a weight
 * breaks absolute continuity of the translated measure and aborts.
 */
class Density {
  public:
    virtual ~Density() = default;
    virtual int dim() const = 0;
    virtual double log_pdf(std::span<const double> x) const = 0;
    /// out = grad p(x) / p(x)
    virtual void score(std::span<const double> x, std::span<double> out) const = 0;
    virtual void sample(RandomStream& rng, std::span<double> out) const = 0;
};

/// Independent Gaussian components; univariate with dim()==1.
class GaussianDensity final : public Density {
  public:
    GaussianDensity(std::vector<double> mean, std::vector<double> sigma);
    static GaussianDensity standard(int dim = 1);

    int dim() const override { return static_cast<int>(mean_.size()); }
    double log_pdf(std::span<const double> x) const override;
    void score(std::span<const double> x, std::span<double> out) const override;
    void sample(RandomStream& rng, std::span<double> out) const override;

  private:
    std::vector<double> mean_, sigma_;
};

/**
 * Iterates of the coupled VaR/CVaR estimation with translations.
 * The scalar estimand of a vector sample is the component sum, which for
 * the univariate case is the sample itself.
 */
struct IsState {
    double xi = 0.0;
    double psi = 0.0;
    double xi_aux = 0.0;      // boosted-level VaR tracker, gates adaptation
    std::vector<double> eta;  // VaR translation
    std::vector<double> mu;   // CVaR translation
    long n = 0;
    bool seeded = false;
};

/**
 * One step of the four continuous recursions, verbatim:
 *   xi  : subgradient step damped by e^(-rho|eta|^b), weight p(x+eta)/p(x),
 *         indicator at the translated value;
 *   eta : double-translation kernel
 *         K(eta,x) = [p^2(x-eta)/(p(x)p(x-2 eta))] [grad p(x-2 eta)/p(x-2 eta)]
 *         damped by e^(-2 rho|eta|^b);
 *   psi : averaging step with weight p(x+mu)/p(x);
 *   mu  : as eta with the squared excess factor and normalizer
 *         e^(-2 rho|mu|^b) / (1 + W(|mu|)^(2c) + xi^2).
 * All right-hand sides read the pre-step state.  With eta = mu = 0 the xi
 * and psi steps coincide exactly with sa_var_update / sa_cvar_update.
 */
void continuous_is_step(IsState& state, std::span<const double> x,
                        const Density& density, double zeta1, double zeta2,
                        double alpha, const IsConfig& cfg, bool adapt);

struct IsEstimate {
    double xi = 0.0;
    double psi = 0.0;
    std::vector<double> eta, mu;
    double weight_mean = 1.0;           // mean of the xi-recursion weights
    double xi_increment_variance = 0.0; // over the second half of the run
    long growth_check_violations = 0;   // samples with (C-xi)+ > W(|x|)^c
};

/// Run `steps` continuous recursions from a fresh state.
IsEstimate estimate_continuous(const Density& density, double alpha,
                               const IsConfig& cfg, const PowerSchedule& zeta1,
                               const PowerSchedule& zeta2, long steps,
                               std::uint64_t seed, bool adapt);

/**
 * Likelihood ratio prod_m pi_theta(a_m|s_m) / pi_(theta+translation)(a_m|s_m)
 * for an episode sampled under the translated policy; computed in log space.
 */
double ssp_is_weight(const EpisodeTrace& episode, const SoftmaxPolicy& base,
                     std::span<const double> translation);

/**
 * One coupled update of the SSP variant.  Translation lives in policy
 * parameter space: `var_ep` was sampled under theta+eta with ratio weight
 * `w_var`, `cvar_ep` under theta+mu with weight `w_cvar`.  The xi/psi steps
 * mirror the continuous ones with the sampled costs already translated;
 * eta and mu descend stochastic score-function gradients of the variance
 * objectives Q1(eta) = E[1{C>=xi} w^2] and Q2(mu) = E[(C-xi)+^2 w^2]
 * (expectations under the translated policy), with the same damping and
 * normalizer as the continuous recursions.
 */
void ssp_is_update(IsState& state, const EpisodeTrace& var_ep, double w_var,
                   const EpisodeTrace& cvar_ep, double w_cvar, double zeta1,
                   double zeta2, double alpha, const IsConfig& cfg, bool adapt);

/**
 * Fixed-theta VaR/CVaR estimation on an SSP model with the policy-ratio IS.
 * Each iteration simulates one episode under pi_(theta+eta) for the VaR
 * recursion and one under pi_(theta+mu) for the CVaR recursion, with
 * episode streams keyed by (seed, iteration, role).
 */
IsEstimate ssp_is_estimate(const SspModel& model, const SoftmaxPolicy& policy,
                           const RiskConfig& cfg, const IsConfig& is_cfg,
                           const PowerSchedule& zeta1, const PowerSchedule& zeta2,
                           long iterations, std::uint64_t seed, bool adapt,
                           int max_steps = kDefaultMaxSteps);

}  // namespace cvarssp

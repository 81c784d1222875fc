#pragma once

#include <span>

namespace cvarssp {

/// Risk level and constraint bound of an experiment.
struct RiskConfig {
    double alpha = 0.95;    // CVaR level, in (0,1)
    double k_alpha = 0.0;   // constraint bound K_alpha
};

/**
 * Rockafellar-Uryasev integrand v(xi, x) = xi + (x - xi)+ / (1 - alpha).
 * Convex and piecewise linear in xi; its expectation over x is minimized at
 * the alpha-VaR, where it equals the alpha-CVaR.
 */
double ru_value(double xi, double x, double alpha);

/**
 * One stochastic subgradient step of the VaR recursion:
 *   xi' = xi - zeta1 * (1 - 1{c >= xi} / (1 - alpha)).
 */
double sa_var_update(double xi, double c, double zeta1, double alpha);

/**
 * One averaging step of the CVaR recursion, using the pre-update xi:
 *   psi' = psi - zeta2 * (psi - ru_value(xi_prev, c)).
 */
double sa_cvar_update(double psi, double xi_prev, double c, double zeta2, double alpha);

/**
 * Coupled (xi, psi) tracker.  The first observed sample seeds xi and psi
 * before its own update is applied, so no scale guess is needed.
 */
class RiskEstimator {
  public:
    explicit RiskEstimator(double alpha);

    void observe(double c, double zeta1, double zeta2);

    double xi() const { return xi_; }
    double psi() const { return psi_; }
    long updates() const { return n_; }
    double alpha() const { return alpha_; }

  private:
    double alpha_;
    double xi_ = 0.0;
    double psi_ = 0.0;
    long n_ = 0;
    bool seeded_ = false;
};

/**
 * Batch VaR: the ceil(alpha * m)-th order statistic (1-indexed) of the
 * samples.  Rejects empty batches.
 */
double batch_var(std::span<const double> samples, double alpha);

/**
 * Batch CVaR: mean of ru_value(xi, sample) in index order.
 */
double batch_cvar(std::span<const double> samples, double xi, double alpha);

/**
 * Averaged-subgradient form of the batch VaR step,
 *   (1/m) sum_j (1 - 1{c_j >= xi_prev} / (1 - alpha)),
 * kept for fidelity studies of the printed recursion; the order statistic
 * above is the default.
 */
double batch_var_subgradient(std::span<const double> samples, double xi_prev, double alpha);

}  // namespace cvarssp

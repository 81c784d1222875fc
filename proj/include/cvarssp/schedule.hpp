#pragma once

#include <cmath>
#include <cstdint>

namespace cvarssp {

/// Polynomially decaying step size coeff * n^(-exponent), n >= 1.
struct PowerSchedule {
    double coeff = 1.0;
    double exponent = 1.0;

    double operator()(std::int64_t n) const {
        return coeff * std::pow(static_cast<double>(n), -exponent);
    }
};

/**
 * The four coupled step-size schedules of the optimizer, fastest to slowest:
 * zeta1 (VaR), zeta2 (CVaR), gamma (policy), beta (multiplier).
 *
 * Construction enforces square-summability with divergence
 * (0.5 < exponent < 1 for zeta1/zeta2/gamma, 0.5 < exponent <= 1 for beta)
 * and the strict timescale ordering
 * zeta1.exponent < zeta2.exponent < gamma.exponent < beta.exponent.
 */
class StepSizeSchedule {
  public:
    StepSizeSchedule(PowerSchedule zeta1, PowerSchedule zeta2, PowerSchedule gamma,
                     PowerSchedule beta);

    /// exponents 0.55 / 0.7 / 0.85 / 1.0, all coefficients 1.
    static StepSizeSchedule defaults();

    double zeta1(std::int64_t n) const { return zeta1_(n); }
    double zeta2(std::int64_t n) const { return zeta2_(n); }
    double gamma(std::int64_t n) const { return gamma_(n); }
    double beta(std::int64_t n) const { return beta_(n); }

    const PowerSchedule& zeta1_schedule() const { return zeta1_; }
    const PowerSchedule& zeta2_schedule() const { return zeta2_; }
    const PowerSchedule& gamma_schedule() const { return gamma_; }
    const PowerSchedule& beta_schedule() const { return beta_; }

  private:
    PowerSchedule zeta1_, zeta2_, gamma_, beta_;
};

}  // namespace cvarssp

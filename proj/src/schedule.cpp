#include "cvarssp/schedule.hpp"

#include <stdexcept>

namespace cvarssp {

namespace {

void check_exponent(double p, bool allow_one, const char* name) {
    const bool ok = p > 0.5 && (allow_one ? p <= 1.0 : p < 1.0);
    if (!ok)
        throw std::invalid_argument(std::string(name) +
                                    " exponent violates the square-summable /"
                                    " divergent range");
}

}  // namespace

StepSizeSchedule::StepSizeSchedule(PowerSchedule zeta1, PowerSchedule zeta2,
                                   PowerSchedule gamma, PowerSchedule beta)
    : zeta1_(zeta1), zeta2_(zeta2), gamma_(gamma), beta_(beta) {
    check_exponent(zeta1.exponent, false, "zeta1");
    check_exponent(zeta2.exponent, false, "zeta2");
    check_exponent(gamma.exponent, false, "gamma");
    check_exponent(beta.exponent, true, "beta");
    if (!(zeta1.exponent < zeta2.exponent && zeta2.exponent < gamma.exponent &&
          gamma.exponent < beta.exponent))
        throw std::invalid_argument(
            "step-size exponents must be strictly ordered zeta1 < zeta2 < gamma < beta");
    if (!(zeta1.coeff > 0.0 && zeta2.coeff > 0.0 && gamma.coeff > 0.0 && beta.coeff > 0.0))
        throw std::invalid_argument("step-size coefficients must be positive");
}

StepSizeSchedule StepSizeSchedule::defaults() {
    return StepSizeSchedule({1.0, 0.55}, {1.0, 0.7}, {1.0, 0.85}, {1.0, 1.0});
}

}  // namespace cvarssp

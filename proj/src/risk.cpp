#include "cvarssp/risk.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cvarssp {

double ru_value(double xi, double x, double alpha) {
    assert(alpha > 0.0 && alpha < 1.0);
    return xi + std::max(x - xi, 0.0) / (1.0 - alpha);
}

double sa_var_update(double xi, double c, double zeta1, double alpha) {
    assert(alpha > 0.0 && alpha < 1.0);
    const double indicator = c >= xi ? 1.0 : 0.0;
    return xi - zeta1 * (1.0 - indicator / (1.0 - alpha));
}

double sa_cvar_update(double psi, double xi_prev, double c, double zeta2, double alpha) {
    return psi - zeta2 * (psi - ru_value(xi_prev, c, alpha));
}

RiskEstimator::RiskEstimator(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
}

void RiskEstimator::observe(double c, double zeta1, double zeta2) {
    if (!seeded_) {
        xi_ = c;
        psi_ = c;
        seeded_ = true;
    }
    const double xi_prev = xi_;
    xi_ = sa_var_update(xi_prev, c, zeta1, alpha_);
    psi_ = sa_cvar_update(psi_, xi_prev, c, zeta2, alpha_);
    ++n_;
}

double batch_var(std::span<const double> samples, double alpha) {
    if (samples.empty()) throw std::invalid_argument("batch VaR of an empty batch");
    assert(alpha > 0.0 && alpha < 1.0);
    const std::size_t m = samples.size();
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(m)));
    assert(rank >= 1 && rank <= m);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::nth_element(sorted.begin(), sorted.begin() + (rank - 1), sorted.end());
    return sorted[rank - 1];
}

double batch_cvar(std::span<const double> samples, double xi, double alpha) {
    if (samples.empty()) throw std::invalid_argument("batch CVaR of an empty batch");
    double sum = 0.0;
    for (const double c : samples) sum += ru_value(xi, c, alpha);
    return sum / static_cast<double>(samples.size());
}

double batch_var_subgradient(std::span<const double> samples, double xi_prev,
                             double alpha) {
    if (samples.empty()) throw std::invalid_argument("batch update from an empty batch");
    double sum = 0.0;
    for (const double c : samples)
        sum += 1.0 - (c >= xi_prev ? 1.0 : 0.0) / (1.0 - alpha);
    return sum / static_cast<double>(samples.size());
}

}  // namespace cvarssp

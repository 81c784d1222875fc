#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "cvarssp/model.hpp"
#include "cvarssp/policy.hpp"

namespace cvarssp {

class ResidualMassTooLarge : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class EnumerationTooLarge : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Atomic distribution of the accumulated risk cost at termination.
 * Atoms are sorted by value, probabilities strictly positive, values
 * distinct beyond a 1e-12 merge tolerance.  residual_mass is the
 * probability of trajectories that did not terminate within the horizon.
 */
struct CostDistribution {
    struct Atom {
        double value;
        double prob;
    };
    std::vector<Atom> atoms;
    double residual_mass = 0.0;

    double total_prob() const;  // sorted-order sum over atoms
    double mean() const;
};

struct EnumerationResult {
    CostDistribution cost;
    double mean_g = 0.0;  // mean of total_g over terminated trajectories
};

/**
 * Enumerate all trajectories of `model` under `policy` up to `horizon`
 * steps and collect the exact distribution of total_c plus the mean of
 * total_g.  Prefixes in the same state with bit-identical accumulated cost
 * are merged, which leaves the resulting distribution unchanged while
 * keeping the enumeration polynomial for structured cost tables.  All
 * reductions run in deterministic sorted order.
 *
 * Throws ResidualMassTooLarge if more than `mass_tol` probability is still
 * in flight at the horizon, and EnumerationTooLarge when the number of
 * distinct (state, cost) cells exceeds `max_cells`.
 */
EnumerationResult enumerate_cost_distribution(const SspModel& model,
                                              const SoftmaxPolicy& policy,
                                              int horizon, double mass_tol,
                                              std::size_t max_cells = 2000000);

/**
 * Exact VaR/CVaR of an atomic distribution at level alpha:
 * VaR is the smallest atom with cumulative probability >= alpha, CVaR the
 * Rockafellar-Uryasev value VaR + E[(X - VaR)+]/(1 - alpha).
 * Requires residual_mass <= (1 - alpha)/100 so the ignored tail cannot
 * move the result materially.
 */
std::pair<double, double> exact_var_cvar(const CostDistribution& dist, double alpha);

/// xi + E[(X - xi)+]/(1 - alpha) evaluated on the atoms.
double ru_objective(const CostDistribution& dist, double xi, double alpha);

enum class OracleQuantity { MeanG, CvarC };

/**
 * Central finite differences of the enumerated mean-g or exact CVaR with
 * respect to theta, component by component: (f(theta + h e_i) -
 * f(theta - h e_i)) / (2h).
 */
std::vector<double> finite_difference_gradient(const SspModel& model,
                                               const SoftmaxPolicy& policy,
                                               OracleQuantity quantity, double alpha,
                                               int horizon, double mass_tol,
                                               double h = 1e-4);

}  // namespace cvarssp

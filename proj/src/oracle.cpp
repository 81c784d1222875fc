#include "cvarssp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cvarssp {

double CostDistribution::total_prob() const {
    double sum = 0.0;
    for (const auto& a : atoms) sum += a.prob;
    return sum;
}

double CostDistribution::mean() const {
    double sum = 0.0;
    for (const auto& a : atoms) sum += a.prob * a.value;
    return sum;
}

EnumerationResult enumerate_cost_distribution(const SspModel& model,
                                              const SoftmaxPolicy& policy,
                                              int horizon, double mass_tol,
                                              std::size_t max_cells) {
    // A cell keys every live trajectory prefix by (state, accumulated c).
    // Merging is exact: prefixes in a cell share their conditional future,
    // and the g bookkeeping only needs the probability-weighted sum.
    struct Mass {
        double prob = 0.0;
        double g_weighted = 0.0;  // sum over prefixes of prob * accumulated g
    };
    using CellKey = std::pair<double, int>;  // (cost, state), ordered
    std::map<CellKey, Mass> cells;
    cells[{0.0, model.start_state}] = {1.0, 0.0};

    std::map<double, double> atom_probs;
    double mean_g_acc = 0.0;

    std::vector<std::vector<double>> probs(model.num_states);
    for (int s = 1; s < model.num_states; ++s) policy.action_probabilities(s, probs[s]);

    std::map<CellKey, Mass> next;
    for (int step = 0; step < horizon && !cells.empty(); ++step) {
        next.clear();
        for (const auto& [key, mass] : cells) {
            const auto [c_acc, s] = key;
            for (int a = 0; a < model.actions[s]; ++a) {
                const double pa = probs[s][a];
                if (pa <= 0.0) continue;
                const double c_next = c_acc + model.cost_c[s][a];
                const double g_step = model.cost_g[s][a];
                for (int t = 0; t < model.num_states; ++t) {
                    const double pt = model.transition[s][a][t];
                    if (pt <= 0.0) continue;
                    const double w = pa * pt;
                    if (t == 0) {
                        atom_probs[c_next] += mass.prob * w;
                        mean_g_acc += (mass.g_weighted + mass.prob * g_step) * w;
                    } else {
                        Mass& cell = next[{c_next, t}];
                        cell.prob += mass.prob * w;
                        cell.g_weighted += (mass.g_weighted + mass.prob * g_step) * w;
                    }
                }
            }
        }
        cells.swap(next);
        if (cells.size() > max_cells)
            throw EnumerationTooLarge("trajectory enumeration exceeded " +
                                      std::to_string(max_cells) + " cells");
    }

    double residual = 0.0;
    for (const auto& [key, mass] : cells) residual += mass.prob;
    if (residual > mass_tol)
        throw ResidualMassTooLarge("residual trajectory mass " + std::to_string(residual) +
                                   " exceeds tolerance " + std::to_string(mass_tol));

    EnumerationResult result;
    result.cost.residual_mass = residual;
    for (const auto& [value, prob] : atom_probs) {
        if (prob <= 0.0) continue;
        if (!result.cost.atoms.empty() &&
            value - result.cost.atoms.back().value <= 1e-12) {
            result.cost.atoms.back().prob += prob;
        } else {
            result.cost.atoms.push_back({value, prob});
        }
    }
    const double terminated = 1.0 - residual;
    result.mean_g = terminated > 0.0 ? mean_g_acc / terminated : 0.0;
    return result;
}

std::pair<double, double> exact_var_cvar(const CostDistribution& dist, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
    if (dist.atoms.empty())
        throw std::invalid_argument("cannot take VaR of an empty distribution");
    if (dist.residual_mass > (1.0 - alpha) / 100.0)
        throw ResidualMassTooLarge(
            "residual mass too large for a reliable tail at this alpha");

    double cum = 0.0;
    double var = dist.atoms.back().value;
    for (const auto& atom : dist.atoms) {
        cum += atom.prob;
        if (cum >= alpha) {
            var = atom.value;
            break;
        }
    }
    double excess = 0.0;
    for (const auto& atom : dist.atoms)
        if (atom.value > var) excess += atom.prob * (atom.value - var);
    return {var, var + excess / (1.0 - alpha)};
}

double ru_objective(const CostDistribution& dist, double xi, double alpha) {
    double excess = 0.0;
    for (const auto& atom : dist.atoms)
        if (atom.value > xi) excess += atom.prob * (atom.value - xi);
    return xi + excess / (1.0 - alpha);
}

std::vector<double> finite_difference_gradient(const SspModel& model,
                                               const SoftmaxPolicy& policy,
                                               OracleQuantity quantity, double alpha,
                                               int horizon, double mass_tol, double h) {
    SoftmaxPolicy shifted = policy;
    auto evaluate = [&]() {
        const EnumerationResult r =
            enumerate_cost_distribution(model, shifted, horizon, mass_tol);
        return quantity == OracleQuantity::MeanG ? r.mean_g
                                                 : exact_var_cvar(r.cost, alpha).second;
    };
    std::vector<double> grad(policy.dim());
    for (int i = 0; i < policy.dim(); ++i) {
        shifted.theta()[i] = policy.theta()[i] + h;
        const double up = evaluate();
        shifted.theta()[i] = policy.theta()[i] - h;
        const double down = evaluate();
        shifted.theta()[i] = policy.theta()[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace cvarssp

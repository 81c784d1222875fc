#pragma once

#include <string>
#include <vector>

namespace cvarssp {

/**
 * Finite stochastic shortest path model.
 *
 * State 0 is the absorbing, cost-free terminal state.  States 1..r are
 * transient decision states.  Two running costs are attached to every
 * state-action pair: `cost_g` (the objective) and `cost_c` (the
 * risk-constrained cost).
 */
struct SspModel {
    int num_states = 0;                                      // r + 1
    std::vector<int> actions;                                // |A(s)| per state
    std::vector<std::vector<std::vector<double>>> transition;  // [s][a][s']
    std::vector<std::vector<double>> cost_g;                 // [s][a]
    std::vector<std::vector<double>> cost_c;                 // [s][a]
    int start_state = 1;
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> violations;
};

/**
 * Structural checks for an SSP model:
 *  - array shapes agree with num_states/actions,
 *  - transition rows are probability vectors (sum within 1e-12 of 1),
 *  - state 0 is absorbing and cost-free,
 *  - every state reaches 0 in the support graph,
 *  - start_state is a transient state.
 *
 * Support-graph reachability of the terminal is the properness proxy: it
 * guarantees every strictly positive policy is proper, which is all the
 * optimizer requires.
 */
ValidationReport validate_model(const SspModel& model);

}  // namespace cvarssp

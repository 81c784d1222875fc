#pragma once

#include <span>
#include <vector>

#include "cvarssp/rng.hpp"

namespace cvarssp {

/// phi[s][a] is the feature vector of the pair (s, a); entries for state 0
/// are present but never consulted.
using FeatureTable = std::vector<std::vector<std::vector<double>>>;

/**
 * Softmax policy over the actions of each transient state.
 *
 * Two parameterizations:
 *  - tabular: one logit per (state, action) pair, theta laid out as
 *    consecutive per-state blocks for states 1..r;
 *  - feature: logits theta . phi(s, a) with a shared parameter vector.
 *
 * Probabilities are computed with max-subtraction, so they are finite and
 * strictly positive for every finite theta.  The terminal state has no
 * decision and is rejected.
 */
class SoftmaxPolicy {
  public:
    /// Tabular parameterization, theta initialized to zero.
    static SoftmaxPolicy tabular(std::vector<int> actions_per_state);

    /// Feature parameterization with `dim` shared parameters, theta zero.
    static SoftmaxPolicy with_features(std::vector<int> actions_per_state,
                                       FeatureTable features, int dim);

    int dim() const { return static_cast<int>(theta_.size()); }
    int num_states() const { return static_cast<int>(actions_.size()); }
    int num_actions(int state) const { return actions_[state]; }
    bool is_tabular() const { return features_.empty(); }

    const std::vector<double>& theta() const { return theta_; }
    std::vector<double>& theta() { return theta_; }

    /// Offset of the tabular block of `state` inside theta.
    int block_offset(int state) const;

    /// pi_theta(.|state); `out` is resized to the action count.
    void action_probabilities(int state, std::vector<double>& out) const;
    std::vector<double> action_probabilities(int state) const;

    /// One draw from pi_theta(.|state); consumes one uniform.
    int sample_action(int state, RandomStream& rng) const;

    /// grad_theta log pi_theta(action|state).
    std::vector<double> score(int state, int action) const;

    /**
     * accum += grad_theta log pi_theta(action|state), with the state's action
     * probabilities already computed (saves a softmax in the episode loop).
     */
    void add_score(int state, int action, std::span<const double> probs,
                   std::span<double> accum) const;

  private:
    SoftmaxPolicy() = default;
    void check_state(int state) const;

    std::vector<int> actions_;   // per state, index 0 unused for decisions
    std::vector<int> offsets_;   // tabular block offsets, -1 for state 0
    FeatureTable features_;      // empty for tabular
    std::vector<double> theta_;
};

}  // namespace cvarssp

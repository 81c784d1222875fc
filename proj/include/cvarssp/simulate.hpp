#pragma once

#include <stdexcept>
#include <vector>

#include "cvarssp/model.hpp"
#include "cvarssp/policy.hpp"
#include "cvarssp/rng.hpp"

namespace cvarssp {

/// Thrown when an episode fails to reach the terminal within max_steps.
class EpisodeOverflow : public std::runtime_error {
  public:
    explicit EpisodeOverflow(int max_steps)
        : std::runtime_error("episode exceeded " + std::to_string(max_steps) +
                             " steps without terminating") {}
};

/**
 * One simulated trajectory.  states/actions cover the tau visited decision
 * states; the step after states[tau-1] lands in the terminal.  score_sum is
 * the accumulated policy score sum_m grad log pi_theta(a_m|s_m).
 */
struct EpisodeTrace {
    std::vector<int> states;
    std::vector<int> actions;
    int tau = 0;
    double total_g = 0.0;
    double total_c = 0.0;
    std::vector<double> score_sum;
};

inline constexpr int kDefaultMaxSteps = 100000;

/**
 * Roll out one episode from model.start_state under `policy`.
 * Consumes exactly two uniforms per step (action, successor), so a fixed
 * seed replays bit-identically.  Throws EpisodeOverflow if the terminal is
 * not reached within max_steps.
 */
void simulate_episode(const SspModel& model, const SoftmaxPolicy& policy,
                      RandomStream& rng, EpisodeTrace& out,
                      int max_steps = kDefaultMaxSteps);

EpisodeTrace simulate_episode(const SspModel& model, const SoftmaxPolicy& policy,
                              RandomStream& rng, int max_steps = kDefaultMaxSteps);

}  // namespace cvarssp

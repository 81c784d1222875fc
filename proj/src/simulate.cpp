#include "cvarssp/simulate.hpp"

namespace cvarssp {

void simulate_episode(const SspModel& model, const SoftmaxPolicy& policy,
                      RandomStream& rng, EpisodeTrace& out, int max_steps) {
    out.states.clear();
    out.actions.clear();
    out.tau = 0;
    out.total_g = 0.0;
    out.total_c = 0.0;
    out.score_sum.assign(policy.dim(), 0.0);

    thread_local std::vector<double> probs;
    int s = model.start_state;
    for (int step = 0; step < max_steps; ++step) {
        policy.action_probabilities(s, probs);
        const int a = static_cast<int>(rng.categorical(probs));
        out.states.push_back(s);
        out.actions.push_back(a);
        out.total_g += model.cost_g[s][a];
        out.total_c += model.cost_c[s][a];
        policy.add_score(s, a, probs, out.score_sum);
        s = static_cast<int>(rng.categorical(model.transition[s][a]));
        if (s == 0) {
            out.tau = step + 1;
            return;
        }
    }
    throw EpisodeOverflow(max_steps);
}

EpisodeTrace simulate_episode(const SspModel& model, const SoftmaxPolicy& policy,
                              RandomStream& rng, int max_steps) {
    EpisodeTrace tr;
    simulate_episode(model, policy, rng, tr, max_steps);
    return tr;
}

}  // namespace cvarssp

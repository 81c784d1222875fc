#include "cvarssp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cvarssp {

SoftmaxPolicy SoftmaxPolicy::tabular(std::vector<int> actions_per_state) {
    if (actions_per_state.size() < 2)
        throw std::invalid_argument("policy needs at least one transient state");
    SoftmaxPolicy p;
    p.actions_ = std::move(actions_per_state);
    p.offsets_.assign(p.actions_.size(), -1);
    int off = 0;
    for (std::size_t s = 1; s < p.actions_.size(); ++s) {
        if (p.actions_[s] < 1)
            throw std::invalid_argument("every transient state needs an action");
        p.offsets_[s] = off;
        off += p.actions_[s];
    }
    p.theta_.assign(off, 0.0);
    return p;
}

SoftmaxPolicy SoftmaxPolicy::with_features(std::vector<int> actions_per_state,
                                           FeatureTable features, int dim) {
    if (dim < 1) throw std::invalid_argument("feature dimension must be positive");
    if (features.size() != actions_per_state.size())
        throw std::invalid_argument("feature table must cover every state");
    SoftmaxPolicy p;
    p.actions_ = std::move(actions_per_state);
    for (std::size_t s = 1; s < p.actions_.size(); ++s) {
        if (static_cast<int>(features[s].size()) != p.actions_[s])
            throw std::invalid_argument("feature table must cover every action");
        for (const auto& phi : features[s])
            if (static_cast<int>(phi.size()) != dim)
                throw std::invalid_argument("feature vectors must have the stated dimension");
    }
    p.offsets_.assign(p.actions_.size(), -1);
    p.features_ = std::move(features);
    p.theta_.assign(dim, 0.0);
    return p;
}

void SoftmaxPolicy::check_state(int state) const {
    if (state <= 0 || state >= num_states())
        throw std::invalid_argument("policy queried at a non-decision state");
}

int SoftmaxPolicy::block_offset(int state) const {
    check_state(state);
    return offsets_[state];
}

void SoftmaxPolicy::action_probabilities(int state, std::vector<double>& out) const {
    check_state(state);
    const int na = actions_[state];
    out.resize(na);
    if (is_tabular()) {
        const int off = offsets_[state];
        for (int a = 0; a < na; ++a) out[a] = theta_[off + a];
    } else {
        for (int a = 0; a < na; ++a) {
            const auto& phi = features_[state][a];
            double logit = 0.0;
            for (int k = 0; k < dim(); ++k) logit += theta_[k] * phi[k];
            out[a] = logit;
        }
    }
    const double m = *std::max_element(out.begin(), out.end());
    double z = 0.0;
    for (int a = 0; a < na; ++a) {
        out[a] = std::exp(out[a] - m);
        z += out[a];
    }
    for (int a = 0; a < na; ++a) out[a] /= z;
}

std::vector<double> SoftmaxPolicy::action_probabilities(int state) const {
    std::vector<double> out;
    action_probabilities(state, out);
    return out;
}

int SoftmaxPolicy::sample_action(int state, RandomStream& rng) const {
    std::vector<double> probs;
    action_probabilities(state, probs);
    return static_cast<int>(rng.categorical(probs));
}

std::vector<double> SoftmaxPolicy::score(int state, int action) const {
    std::vector<double> probs;
    action_probabilities(state, probs);
    std::vector<double> out(theta_.size(), 0.0);
    add_score(state, action, probs, out);
    return out;
}

void SoftmaxPolicy::add_score(int state, int action, std::span<const double> probs,
                              std::span<double> accum) const {
    const int na = actions_[state];
    if (action < 0 || action >= na)
        throw std::invalid_argument("score requested for an action outside A(s)");
    if (is_tabular()) {
        const int off = offsets_[state];
        accum[off + action] += 1.0;
        for (int a = 0; a < na; ++a) accum[off + a] -= probs[a];
    } else {
        const auto& phi_a = features_[state][action];
        for (int k = 0; k < dim(); ++k) accum[k] += phi_a[k];
        for (int a = 0; a < na; ++a) {
            const auto& phi = features_[state][a];
            for (int k = 0; k < dim(); ++k) accum[k] -= probs[a] * phi[k];
        }
    }
}

}  // namespace cvarssp

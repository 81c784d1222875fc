#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "cvarssp/model.hpp"
#include "cvarssp/policy.hpp"

namespace cvarssp {

class ModelIoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Model plus the optional feature table enabling a feature-softmax policy.
struct LoadedModel {
    SspModel model;
    std::optional<FeatureTable> features;
    int feature_dim = 0;
};

/**
 * JSON document with fields num_states, actions, transition, cost_g,
 * cost_c, start_state, and optionally features (per state, per action,
 * a fixed-dimension real vector; entries for state 0 may be empty).
 * Structural problems raise ModelIoError; semantic checks are left to
 * validate_model.
 */
LoadedModel parse_model_json(const std::string& text);
LoadedModel load_model_json(const std::string& path);

std::string model_to_json(const SspModel& model);
void save_model_json(const SspModel& model, const std::string& path);

}  // namespace cvarssp

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "cvarssp/optimizer.hpp"

namespace cvarssp {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/**
 * Everything one run depends on.  The struct round-trips through JSON, and
 * the summary written by run_experiment echoes it, so any finished run can
 * be reproduced bit for bit from its own summary.
 */
struct ExperimentConfig {
    std::string env = "bandit-ssp";  // built-in name; ignored when model_path set
    std::string model_path;          // JSON model file; mutually exclusive with env
    std::string algo = "sa";         // "sa" | "mb"
    double alpha = 0.95;
    double k_alpha = 0.0;
    std::int64_t iterations = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = "out";

    double zeta1_coeff = 1.0, zeta1_exp = 0.55;
    double zeta2_coeff = 1.0, zeta2_exp = 0.7;
    double gamma_coeff = 1.0, gamma_exp = 0.85;
    double beta_coeff = 1.0, beta_exp = 1.0;

    double lambda0 = 0.0;
    double lambda_max = 1000.0;
    int max_steps = kDefaultMaxSteps;

    std::string grad_mode = "per-episode";       // | "smoothed"
    std::string grad_scaling = "unconditional";  // | "conditional"

    double batch_coeff = 5.0, batch_exp = 0.6;   // mb only
    std::string mb_grad = "per-episode-mean";    // | "aggregate-product"
    std::string mb_var_mode = "quantile";        // | "subgradient-average" | "robbins-monro"

    std::string is_mode = "off";                 // | "fixed" | "adaptive"; sa only
    double is_rho = 1.0, is_b = 2.0, is_growth_c = 1.0;
    // tempers translation adaptation at an easier tail level so it can
    // find useful translations for extreme quantiles; estimates stay at alpha
    double is_alpha_boost = 1.0;
};

std::string config_to_json_text(const ExperimentConfig& config);
/// Rejects unknown keys and type mismatches with ConfigError.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

struct ExperimentOutputs {
    std::string trace_path;
    std::string summary_path;
    RunResult result;
};

/**
 * Resolve the model, run the configured algorithm, and write
 * <out_dir>/trace.csv plus <out_dir>/summary.json.  The summary carries the
 * config echo, final iterates, and, when the model is small enough to
 * enumerate, exact mean-G / VaR / RU-CVaR of the final and averaged
 * policies.  Output bytes depend only on the config.
 *
 * Throws ConfigError for invalid configs; simulation and update failures
 * (EpisodeOverflow, NonFiniteIterate, ...) propagate as-is.
 */
ExperimentOutputs run_experiment(const ExperimentConfig& config);

}  // namespace cvarssp

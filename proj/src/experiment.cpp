#include "cvarssp/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "cvarssp/environments.hpp"
#include "cvarssp/model_io.hpp"
#include "cvarssp/oracle.hpp"

namespace cvarssp {

namespace {

using nlohmann::json;

GradMode parse_grad_mode(const std::string& s) {
    if (s == "per-episode") return GradMode::PerEpisode;
    if (s == "smoothed") return GradMode::PaperSmoothed;
    throw ConfigError("grad_mode must be 'per-episode' or 'smoothed', got '" + s + "'");
}

CvarGradScaling parse_scaling(const std::string& s) {
    if (s == "unconditional") return CvarGradScaling::Unconditional;
    if (s == "conditional") return CvarGradScaling::Conditional;
    throw ConfigError("grad_scaling must be 'unconditional' or 'conditional', got '" +
                      s + "'");
}

MbGradForm parse_mb_grad(const std::string& s) {
    if (s == "per-episode-mean") return MbGradForm::PerEpisodeMean;
    if (s == "aggregate-product") return MbGradForm::AggregateProduct;
    throw ConfigError(
        "mb_grad must be 'per-episode-mean' or 'aggregate-product', got '" + s + "'");
}

MbVarMode parse_mb_var_mode(const std::string& s) {
    if (s == "quantile") return MbVarMode::Quantile;
    if (s == "subgradient-average") return MbVarMode::SubgradientAverage;
    if (s == "robbins-monro") return MbVarMode::RobbinsMonro;
    throw ConfigError(
        "mb_var_mode must be 'quantile', 'subgradient-average' or 'robbins-monro', "
        "got '" + s + "'");
}

IsMode parse_is_mode(const std::string& s) {
    if (s == "off") return IsMode::Off;
    if (s == "fixed") return IsMode::Fixed;
    if (s == "adaptive") return IsMode::Adaptive;
    throw ConfigError("is_mode must be 'off', 'fixed' or 'adaptive', got '" + s + "'");
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["env"] = c.env;
    j["model_path"] = c.model_path;
    j["algo"] = c.algo;
    j["alpha"] = c.alpha;
    j["k_alpha"] = c.k_alpha;
    j["iterations"] = c.iterations;
    j["seed"] = c.seed;
    j["workers"] = c.workers;
    j["out_dir"] = c.out_dir;
    j["zeta1_coeff"] = c.zeta1_coeff;
    j["zeta1_exp"] = c.zeta1_exp;
    j["zeta2_coeff"] = c.zeta2_coeff;
    j["zeta2_exp"] = c.zeta2_exp;
    j["gamma_coeff"] = c.gamma_coeff;
    j["gamma_exp"] = c.gamma_exp;
    j["beta_coeff"] = c.beta_coeff;
    j["beta_exp"] = c.beta_exp;
    j["lambda0"] = c.lambda0;
    j["lambda_max"] = c.lambda_max;
    j["max_steps"] = c.max_steps;
    j["grad_mode"] = c.grad_mode;
    j["grad_scaling"] = c.grad_scaling;
    j["batch_coeff"] = c.batch_coeff;
    j["batch_exp"] = c.batch_exp;
    j["mb_grad"] = c.mb_grad;
    j["mb_var_mode"] = c.mb_var_mode;
    j["is_mode"] = c.is_mode;
    j["is_rho"] = c.is_rho;
    j["is_b"] = c.is_b;
    j["is_growth_c"] = c.is_growth_c;
    j["is_alpha_boost"] = c.is_alpha_boost;
    return j;
}

void read_string(const json& j, const char* key, std::string& dst) {
    if (!j.at(key).is_string())
        throw ConfigError(std::string("config field '") + key + "' must be a string");
    dst = j.at(key).get<std::string>();
}

void read_double(const json& j, const char* key, double& dst) {
    if (!j.at(key).is_number())
        throw ConfigError(std::string("config field '") + key + "' must be a number");
    dst = j.at(key).get<double>();
}

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const char* known[] = {
        "env",         "model_path",  "algo",        "alpha",       "k_alpha",
        "iterations",  "seed",        "workers",     "out_dir",     "zeta1_coeff",
        "zeta1_exp",   "zeta2_coeff", "zeta2_exp",   "gamma_coeff", "gamma_exp",
        "beta_coeff",  "beta_exp",    "lambda0",     "lambda_max",  "max_steps",
        "grad_mode",   "grad_scaling", "batch_coeff", "batch_exp",  "mb_grad",
        "mb_var_mode", "is_mode",     "is_rho",      "is_b",        "is_growth_c",
        "is_alpha_boost"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("unknown config field '" + it.key() + "'");
    }

    ExperimentConfig c;
    if (j.contains("env")) read_string(j, "env", c.env);
    if (j.contains("model_path")) read_string(j, "model_path", c.model_path);
    if (j.contains("algo")) read_string(j, "algo", c.algo);
    if (j.contains("alpha")) read_double(j, "alpha", c.alpha);
    if (j.contains("k_alpha")) read_double(j, "k_alpha", c.k_alpha);
    if (j.contains("iterations")) {
        if (!j.at("iterations").is_number_integer())
            throw ConfigError("config field 'iterations' must be an integer");
        c.iterations = j.at("iterations").get<std::int64_t>();
    }
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!(s.is_number_unsigned() || (s.is_number_integer() && s.get<std::int64_t>() >= 0)))
            throw ConfigError("config field 'seed' must be a non-negative integer");
        c.seed = s.get<std::uint64_t>();
    }
    if (j.contains("workers")) {
        if (!j.at("workers").is_number_integer())
            throw ConfigError("config field 'workers' must be an integer");
        c.workers = j.at("workers").get<int>();
    }
    if (j.contains("out_dir")) read_string(j, "out_dir", c.out_dir);
    if (j.contains("zeta1_coeff")) read_double(j, "zeta1_coeff", c.zeta1_coeff);
    if (j.contains("zeta1_exp")) read_double(j, "zeta1_exp", c.zeta1_exp);
    if (j.contains("zeta2_coeff")) read_double(j, "zeta2_coeff", c.zeta2_coeff);
    if (j.contains("zeta2_exp")) read_double(j, "zeta2_exp", c.zeta2_exp);
    if (j.contains("gamma_coeff")) read_double(j, "gamma_coeff", c.gamma_coeff);
    if (j.contains("gamma_exp")) read_double(j, "gamma_exp", c.gamma_exp);
    if (j.contains("beta_coeff")) read_double(j, "beta_coeff", c.beta_coeff);
    if (j.contains("beta_exp")) read_double(j, "beta_exp", c.beta_exp);
    if (j.contains("lambda0")) read_double(j, "lambda0", c.lambda0);
    if (j.contains("lambda_max")) read_double(j, "lambda_max", c.lambda_max);
    if (j.contains("max_steps")) {
        if (!j.at("max_steps").is_number_integer())
            throw ConfigError("config field 'max_steps' must be an integer");
        c.max_steps = j.at("max_steps").get<int>();
    }
    if (j.contains("grad_mode")) read_string(j, "grad_mode", c.grad_mode);
    if (j.contains("grad_scaling")) read_string(j, "grad_scaling", c.grad_scaling);
    if (j.contains("batch_coeff")) read_double(j, "batch_coeff", c.batch_coeff);
    if (j.contains("batch_exp")) read_double(j, "batch_exp", c.batch_exp);
    if (j.contains("mb_grad")) read_string(j, "mb_grad", c.mb_grad);
    if (j.contains("mb_var_mode")) read_string(j, "mb_var_mode", c.mb_var_mode);
    if (j.contains("is_mode")) read_string(j, "is_mode", c.is_mode);
    if (j.contains("is_rho")) read_double(j, "is_rho", c.is_rho);
    if (j.contains("is_b")) read_double(j, "is_b", c.is_b);
    if (j.contains("is_growth_c")) read_double(j, "is_growth_c", c.is_growth_c);
    if (j.contains("is_alpha_boost")) read_double(j, "is_alpha_boost", c.is_alpha_boost);
    return c;
}

struct ResolvedRun {
    LoadedModel loaded;
    SoftmaxPolicy policy;
    RiskConfig risk;
    StepSizeSchedule schedule;
    MiniBatchPlan plan;
    RunOptions options;
    bool mini_batch = false;
};

ResolvedRun resolve(const ExperimentConfig& c) {
    if (c.algo != "sa" && c.algo != "mb")
        throw ConfigError("algo must be 'sa' or 'mb', got '" + c.algo + "'");
    if (!(c.alpha > 0.0 && c.alpha < 1.0))
        throw ConfigError("alpha must lie in (0, 1)");
    if (!std::isfinite(c.k_alpha)) throw ConfigError("k_alpha must be finite");
    if (c.iterations < 1) throw ConfigError("iterations must be >= 1");
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (c.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (!std::isfinite(c.lambda_max) || c.lambda_max < 0.0)
        throw ConfigError("lambda_max must be finite and >= 0");
    if (!(c.lambda0 >= 0.0 && c.lambda0 <= c.lambda_max))
        throw ConfigError("lambda0 must lie in [0, lambda_max]");

    RunOptions options;
    options.grad_mode = parse_grad_mode(c.grad_mode);
    options.scaling = parse_scaling(c.grad_scaling);
    options.mb_grad_form = parse_mb_grad(c.mb_grad);
    options.mb_var_mode = parse_mb_var_mode(c.mb_var_mode);
    options.is_mode = parse_is_mode(c.is_mode);
    options.lambda0 = c.lambda0;
    options.lambda_max = c.lambda_max;
    options.max_steps = c.max_steps;
    options.workers = c.workers;
    if (!(c.is_alpha_boost >= 1.0) || !std::isfinite(c.is_alpha_boost))
        throw ConfigError("is_alpha_boost must be finite and >= 1");
    options.is.rho = c.is_rho;
    options.is.b = c.is_b;
    options.is.growth_c = c.is_growth_c;
    options.is.alpha_boost = c.is_alpha_boost;

    const bool mini_batch = c.algo == "mb";
    if (mini_batch && options.is_mode != IsMode::Off)
        throw ConfigError("importance sampling requires algo 'sa'");
    if (options.is_mode != IsMode::Off) {
        try {
            options.is.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    LoadedModel loaded;
    try {
        if (!c.model_path.empty())
            loaded = load_model_json(c.model_path);
        else
            loaded.model = builtin_environment(c.env);
    } catch (const ModelIoError& e) {
        throw ConfigError(e.what());
    } catch (const UnknownEnvironment& e) {
        throw ConfigError(e.what());
    }
    ValidationReport report = validate_model(loaded.model);
    if (!report.ok) {
        std::string msg = "invalid model:";
        for (const auto& v : report.violations) msg += " " + v + ";";
        throw ConfigError(msg);
    }

    SoftmaxPolicy policy =
        loaded.features
            ? SoftmaxPolicy::with_features(loaded.model.actions, *loaded.features,
                                           loaded.feature_dim)
            : SoftmaxPolicy::tabular(loaded.model.actions);

    try {
        StepSizeSchedule schedule({c.zeta1_coeff, c.zeta1_exp},
                                  {c.zeta2_coeff, c.zeta2_exp},
                                  {c.gamma_coeff, c.gamma_exp},
                                  {c.beta_coeff, c.beta_exp});
        MiniBatchPlan plan;
        plan.coeff = c.batch_coeff;
        plan.exponent = c.batch_exp;
        if (mini_batch) plan.validate(c.iterations);
        return ResolvedRun{std::move(loaded), std::move(policy),
                           RiskConfig{c.alpha, c.k_alpha}, schedule, plan, options,
                           mini_batch};
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows,
                     bool has_is) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    out << "n,xi,psi,lambda,g_bar,c_mean,theta_norm,tau_mean";
    if (has_is) out << ",eta_norm,mu_norm,weight_mean";
    out << "\n";
    char buf[640];
    for (const TraceRow& r : rows) {
        int len;
        if (has_is) {
            len = std::snprintf(
                buf, sizeof buf,
                "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                static_cast<long long>(r.n), r.xi, r.psi, r.lambda, r.g_value,
                r.c_mean, r.theta_norm, r.tau_mean, r.eta_norm, r.mu_norm,
                r.weight_mean);
        } else {
            len = std::snprintf(buf, sizeof buf,
                                "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                                static_cast<long long>(r.n), r.xi, r.psi, r.lambda,
                                r.g_value, r.c_mean, r.theta_norm, r.tau_mean);
        }
        out.write(buf, len);
    }
}

struct OracleEval {
    double mean_g = 0.0;
    double var_c = 0.0;
    double cvar_c = 0.0;
};

std::optional<OracleEval> try_oracle(const SspModel& model,
                                     const SoftmaxPolicy& policy, double alpha) {
    const double tol = std::min(1e-9, (1.0 - alpha) / 200.0);
    for (const int horizon : {64, 256, 1024}) {
        try {
            EnumerationResult r =
                enumerate_cost_distribution(model, policy, horizon, tol, 500000);
            const auto [var, cvar] = exact_var_cvar(r.cost, alpha);
            return OracleEval{r.mean_g, var, cvar};
        } catch (const ResidualMassTooLarge&) {
            continue;
        } catch (const EnumerationTooLarge&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

json oracle_json(const std::optional<OracleEval>& eval) {
    if (!eval) return json(nullptr);
    json j;
    j["mean_g"] = eval->mean_g;
    j["var_c"] = eval->var_c;
    j["cvar_c"] = eval->cvar_c;
    return j;
}

}  // namespace

std::string config_to_json_text(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str());
}

ExperimentOutputs run_experiment(const ExperimentConfig& config) {
    ResolvedRun r = resolve(config);

    RunResult result =
        r.mini_batch
            ? run_pg_cvar_mb(r.loaded.model, r.policy, r.risk, r.schedule, r.plan,
                             config.iterations, config.seed, r.options)
            : run_pg_cvar_sa(r.loaded.model, r.policy, r.risk, r.schedule,
                             config.iterations, config.seed, r.options);

    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const std::string trace_path = (fs::path(config.out_dir) / "trace.csv").string();
    const std::string summary_path =
        (fs::path(config.out_dir) / "summary.json").string();

    write_trace_csv(trace_path, result.trace, result.has_is);

    json summary;
    summary["config"] = config_to_json(config);
    summary["final"]["theta"] = result.final_policy.theta();
    summary["final"]["lambda"] = result.lambda;
    summary["final"]["xi"] = result.xi;
    summary["final"]["psi"] = result.psi;
    summary["averaged"]["theta"] = result.averaged_policy.theta();
    summary["trace_rows"] = result.trace.size();
    summary["oracle"]["final"] =
        oracle_json(try_oracle(r.loaded.model, result.final_policy, config.alpha));
    summary["oracle"]["averaged"] =
        oracle_json(try_oracle(r.loaded.model, result.averaged_policy, config.alpha));

    std::ofstream out(summary_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write summary file: " + summary_path);
    out << summary.dump(2) << "\n";
    out.close();

    return ExperimentOutputs{trace_path, summary_path, std::move(result)};
}

}  // namespace cvarssp

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvarssp/environments.hpp"
#include "cvarssp/experiment.hpp"
#include "cvarssp/model_io.hpp"
#include "cvarssp/simulate.hpp"

namespace {

int fail(const std::string& type, const std::string& message, int code) {
    nlohmann::json err;
    err["error"]["type"] = type;
    err["error"]["message"] = message;
    std::cerr << err.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "CVaR-constrained policy-gradient optimization on stochastic shortest "
        "paths"};

    std::string config_path, env, model_path, algo, out_dir, grad_mode, grad_scaling;
    std::string mb_grad, mb_var_mode, is_value, export_path;
    double alpha = 0, k_alpha = 0, lambda0 = 0, lambda_max = 0;
    double batch_coeff = 0, batch_exp = 0, is_rho = 0, is_b = 0, is_growth_c = 0;
    double zeta1_coeff = 0, zeta1_exp = 0, zeta2_coeff = 0, zeta2_exp = 0;
    double gamma_coeff = 0, gamma_exp = 0, beta_coeff = 0, beta_exp = 0;
    std::int64_t iters = 0;
    std::uint64_t seed = 0;
    int workers = 0, max_steps = 0;
    bool print_config = false;

    auto* o_config = app.add_option("--config", config_path,
                                    "config JSON to start from; flags override");
    auto* o_env = app.add_option("--env", env, "built-in environment name");
    auto* o_model = app.add_option("--model", model_path, "model JSON file");
    auto* o_algo = app.add_option("--algo", algo, "algorithm: sa or mb");
    auto* o_alpha = app.add_option("--alpha", alpha, "CVaR level in (0,1)");
    auto* o_kalpha = app.add_option("--k-alpha", k_alpha, "constraint bound");
    auto* o_iters = app.add_option("--iters", iters, "iteration count");
    auto* o_seed = app.add_option("--seed", seed, "master seed (64-bit unsigned)");
    auto* o_out = app.add_option("--out", out_dir, "output directory");
    auto* o_workers = app.add_option("--workers", workers,
                                     "episode simulation threads (mb batches)");
    auto* o_is = app.add_option("--is", is_value,
                                "importance sampling: off, fixed or adaptive; "
                                "bare flag means adaptive")
                     ->expected(0, 1);
    auto* o_gmode = app.add_option("--grad-mode", grad_mode,
                                   "per-episode or smoothed");
    auto* o_gscale = app.add_option("--grad-scaling", grad_scaling,
                                    "unconditional or conditional");
    auto* o_bcoeff = app.add_option("--batch-coeff", batch_coeff, "batch size coefficient");
    auto* o_bexp = app.add_option("--batch-exp", batch_exp, "batch size exponent");
    auto* o_mbgrad = app.add_option("--mb-grad", mb_grad,
                                    "per-episode-mean or aggregate-product");
    auto* o_mbvar = app.add_option("--mb-var-mode", mb_var_mode,
                                   "quantile, subgradient-average or robbins-monro");
    auto* o_lambda0 = app.add_option("--lambda0", lambda0, "initial multiplier");
    auto* o_lmax = app.add_option("--lambda-max", lambda_max, "multiplier cap");
    auto* o_msteps = app.add_option("--max-steps", max_steps, "episode step cap");
    auto* o_z1c = app.add_option("--zeta1-coeff", zeta1_coeff, "VaR step coefficient");
    auto* o_z1e = app.add_option("--zeta1-exp", zeta1_exp, "VaR step exponent");
    auto* o_z2c = app.add_option("--zeta2-coeff", zeta2_coeff, "CVaR step coefficient");
    auto* o_z2e = app.add_option("--zeta2-exp", zeta2_exp, "CVaR step exponent");
    auto* o_gc = app.add_option("--gamma-coeff", gamma_coeff, "policy step coefficient");
    auto* o_ge = app.add_option("--gamma-exp", gamma_exp, "policy step exponent");
    auto* o_bc = app.add_option("--beta-coeff", beta_coeff, "multiplier step coefficient");
    auto* o_be = app.add_option("--beta-exp", beta_exp, "multiplier step exponent");
    auto* o_isrho = app.add_option("--is-rho", is_rho, "translation damping strength");
    auto* o_isb = app.add_option("--is-b", is_b, "translation damping exponent");
    auto* o_isc = app.add_option("--is-growth-c", is_growth_c, "growth exponent");
    double is_alpha_boost = 0;
    auto* o_isboost = app.add_option("--is-alpha-boost", is_alpha_boost,
                                     "temper translation adaptation at an easier "
                                     "tail level for high-alpha studies (>= 1)");
    app.add_option("--export-model", export_path,
                   "write the resolved model as JSON and exit");
    app.add_flag("--print-config", print_config,
                 "print the effective config JSON and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail("config", e.what(), 2);
    }

    try {
        cvarssp::ExperimentConfig config;
        if (o_config->count() > 0) config = cvarssp::load_config_file(config_path);

        if (o_env->count() > 0) {
            config.env = env;
            config.model_path.clear();
        }
        if (o_model->count() > 0) config.model_path = model_path;
        if (o_algo->count() > 0) config.algo = algo;
        if (o_alpha->count() > 0) config.alpha = alpha;
        if (o_kalpha->count() > 0) config.k_alpha = k_alpha;
        if (o_iters->count() > 0) config.iterations = iters;
        if (o_seed->count() > 0) config.seed = seed;
        if (o_out->count() > 0) config.out_dir = out_dir;
        if (o_workers->count() > 0) config.workers = workers;
        if (o_is->count() > 0) config.is_mode = is_value.empty() ? "adaptive" : is_value;
        if (o_gmode->count() > 0) config.grad_mode = grad_mode;
        if (o_gscale->count() > 0) config.grad_scaling = grad_scaling;
        if (o_bcoeff->count() > 0) config.batch_coeff = batch_coeff;
        if (o_bexp->count() > 0) config.batch_exp = batch_exp;
        if (o_mbgrad->count() > 0) config.mb_grad = mb_grad;
        if (o_mbvar->count() > 0) config.mb_var_mode = mb_var_mode;
        if (o_lambda0->count() > 0) config.lambda0 = lambda0;
        if (o_lmax->count() > 0) config.lambda_max = lambda_max;
        if (o_msteps->count() > 0) config.max_steps = max_steps;
        if (o_z1c->count() > 0) config.zeta1_coeff = zeta1_coeff;
        if (o_z1e->count() > 0) config.zeta1_exp = zeta1_exp;
        if (o_z2c->count() > 0) config.zeta2_coeff = zeta2_coeff;
        if (o_z2e->count() > 0) config.zeta2_exp = zeta2_exp;
        if (o_gc->count() > 0) config.gamma_coeff = gamma_coeff;
        if (o_ge->count() > 0) config.gamma_exp = gamma_exp;
        if (o_bc->count() > 0) config.beta_coeff = beta_coeff;
        if (o_be->count() > 0) config.beta_exp = beta_exp;
        if (o_isrho->count() > 0) config.is_rho = is_rho;
        if (o_isb->count() > 0) config.is_b = is_b;
        if (o_isc->count() > 0) config.is_growth_c = is_growth_c;
        if (o_isboost->count() > 0) config.is_alpha_boost = is_alpha_boost;

        if (const char* env_out = std::getenv("CVAR_SSP_OUT");
            env_out != nullptr && *env_out != '\0')
            config.out_dir = env_out;

        if (print_config) {
            std::cout << cvarssp::config_to_json_text(config);
            return 0;
        }

        if (!export_path.empty()) {
            cvarssp::SspModel model =
                config.model_path.empty()
                    ? cvarssp::builtin_environment(config.env)
                    : cvarssp::load_model_json(config.model_path).model;
            cvarssp::save_model_json(model, export_path);
            std::cout << "model: " << export_path << "\n";
            return 0;
        }

        cvarssp::ExperimentOutputs outputs = cvarssp::run_experiment(config);
        std::cout << "trace: " << outputs.trace_path << "\n"
                  << "summary: " << outputs.summary_path << "\n";
        return 0;
    } catch (const cvarssp::ConfigError& e) {
        return fail("config", e.what(), 2);
    } catch (const cvarssp::ModelIoError& e) {
        return fail("config", e.what(), 2);
    } catch (const cvarssp::UnknownEnvironment& e) {
        return fail("config", e.what(), 2);
    } catch (const cvarssp::EpisodeOverflow& e) {
        return fail("runtime", e.what(), 3);
    } catch (const cvarssp::NonFiniteIterate& e) {
        return fail("runtime", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 4);
    }
}

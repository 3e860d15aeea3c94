#include <iostream>

#include <CLI11.hpp>

#include "csuv/error.hpp"
#include "csuv_cli/commands.hpp"

int main(int argc, char** argv) {
    using namespace csuv;
    using namespace csuv::cli;

    CLI::App app{"Combined selection with uncertainty visualization for sparse linear regression"};
    app.require_subcommand(1);

    // fit
    FitArgs fit;
    std::string methods = "lasso,mcp,scad";
    std::string whiskers = "5,95";
    auto* fit_cmd = app.add_subcommand("fit", "Fit on a CSV data set and write the uncertainty bundle");
    fit_cmd->add_option("csv", fit.csv_path, "Input CSV (header row, numeric values)")->required();
    fit_cmd->add_option("-r,--response", fit.response, "Response column name")->capture_default_str();
    fit_cmd->add_option("--methods", methods, "Constituent methods (lasso, enet, mcp, scad)")->capture_default_str();
    fit_cmd->add_option("--B", fit.config.repetitions, "Number of subsample repetitions")->capture_default_str();
    fit_cmd->add_option("--q", fit.config.retain_percent, "Retention percentile of models per repetition")->capture_default_str();
    fit_cmd->add_option("--w", fit.config.train_percent, "Training percentage of each split")->capture_default_str();
    fit_cmd->add_option("--t", fit.config.threshold, "Relative same-sign frequency threshold")->capture_default_str();
    fit_cmd->add_option("--seed", fit.config.seed, "Random seed")->capture_default_str();
    fit_cmd->add_option("--jobs", fit.config.jobs, "Worker threads (0 = all cores)")->capture_default_str();
    fit_cmd->add_option("--whiskers", whiskers, "Whisker percentiles LOW,HIGH")->capture_default_str();
    fit_cmd->add_option("--compare", fit.compare_path, "CSV of comparison fits (label column then covariates)");
    fit_cmd->add_flag("--compare-constituents", fit.compare_constituents,
                      "Overlay the cross-validated constituent fits");
    fit_cmd->add_option("-o,--out", fit.out_path, "Bundle JSON output")->capture_default_str();
    fit_cmd->add_option("--report", fit.report_path, "Write the text report here instead of stdout");
    fit_cmd->add_flag("!--no-timestamp", fit.timestamp, "Leave generated_at empty");

    // simulate
    std::string sim_config, sim_out;
    int sim_jobs = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a simulation study from an experiment config");
    sim_cmd->add_option("config", sim_config, "Experiment config (JSON)")->required();
    sim_cmd->add_option("-o,--out", sim_out, "Output directory (overrides the config)");
    sim_cmd->add_option("--jobs", sim_jobs, "Worker threads (0 = all cores)")->capture_default_str();

    // serve
    std::string bundle_path, host = "127.0.0.1", ui_dir;
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Serve a bundle and the plot UI over local HTTP");
    serve_cmd->add_option("bundle", bundle_path, "Bundle JSON")->required();
    serve_cmd->add_option("--port", port, "TCP port")->capture_default_str();
    serve_cmd->add_option("--host", host, "Listen address")->capture_default_str();
    serve_cmd->add_option("--ui", ui_dir, "Directory of built UI assets served at /");

    // generate
    GenerateArgs gen;
    std::string model = "m2";
    Index n = 100, p = 100, s = 5;
    double sigma = 1.0, parameter = 0.0;
    std::uint64_t model_seed = 1;
    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic data set as CSV");
    gen_cmd->add_option("--model", model, "m1, m2 (Toeplitz), m3 (block), m4 (factor), m5 (decaying)")->capture_default_str();
    gen_cmd->add_option("--n", n, "Observations")->capture_default_str();
    gen_cmd->add_option("--p", p, "Covariates")->capture_default_str();
    gen_cmd->add_option("--s", s, "True covariates")->capture_default_str();
    gen_cmd->add_option("--sigma", sigma, "Noise standard deviation")->capture_default_str();
    gen_cmd->add_option("--param", parameter, "rho, block correlation or factor count")->capture_default_str();
    gen_cmd->add_option("--seed", model_seed, "Model seed (fixes the coefficients)")->capture_default_str();
    gen_cmd->add_option("--realization", gen.realization, "Realization index")->capture_default_str();
    gen_cmd->add_option("-o,--out", gen.out_path, "Output CSV (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadInput;
    }

    try {
        if (*fit_cmd) {
            fit.config.methods = parse_methods(methods);
            fit.config.whiskers = parse_whiskers(whiskers);
            return cmd_fit(fit, std::cout, std::cerr);
        }
        if (*sim_cmd) return cmd_simulate(sim_config, sim_out, sim_jobs, std::cout, std::cerr);
        if (*serve_cmd) return cmd_serve(bundle_path, host, port, ui_dir, std::cout, std::cerr);
        if (*gen_cmd) {
            const SimModel kind = parse_model(model);
            gen.model = kind == SimModel::m1 ? ModelSpec::model1(sigma, model_seed)
                                             : ModelSpec{kind, n, p, s, sigma, parameter, model_seed};
            return cmd_generate(gen, std::cout, std::cerr);
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

// Command-line front end: simulate | train | forecast | evaluate | experiment.
// Exit codes: 0 success, 1 runtime failure, 2 configuration error, 3 data error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uicast/errors.hpp"
#include "uicast/experiment.hpp"
#include "uicast/model_io.hpp"
#include "uicast/parallel.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string data;
    std::string output_dir = "out";
    int threads = 0;
    std::optional<std::uint64_t> seed;
    uicast::ScaleOverrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool wants_data) {
    cmd->add_option("--config", args.config_path, "Experiment config JSON file");
    cmd->add_option("--preset", args.preset, "Named preset: ar-study, var-study, case1-20, case1-10, case2-block, case3-aux");
    if (wants_data) cmd->add_option("--data", args.data, "Input series CSV (case presets)");
    cmd->add_option("--out", args.output_dir, "Output directory")->capture_default_str();
    cmd->add_option("--threads", args.threads, "Worker threads (0 = hardware)");
    std::uint64_t* seed_slot = nullptr;
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&args](std::uint64_t s) { args.seed = s; }, "Override the experiment seed");
    (void)seed_slot;
    cmd->add_option_function<int>(
        "--length", [&args](int v) { args.overrides.length = v; }, "Override synthetic series length");
    cmd->add_option_function<int>(
        "--replicates", [&args](int v) { args.overrides.replicates = v; }, "Override replicate count");
    cmd->add_option_function<int>(
        "--trees", [&args](int v) { args.overrides.trees = v; }, "Override forest size B");
    cmd->add_option_function<int>(
        "--impute-count", [&args](int v) { args.overrides.impute_count = v; }, "Override L");
    cmd->add_option_function<int>(
        "--iterations", [&args](int v) { args.overrides.iterations = v; },
        "Override training and operational sweep counts");
    cmd->add_option_function<int>(
        "--mtry", [&args](int v) { args.overrides.mtry = v; }, "Override mtry (0 = auto)");
    cmd->add_option_function<int>(
        "--donors", [&args](int v) { args.overrides.donors = v; }, "Override PMM donor pool size");
    cmd->add_option_function<std::vector<double>>(
        "--rates", [&args](std::vector<double> v) { args.overrides.missing_rates = std::move(v); },
        "Override missing-rate grid");
    cmd->add_option_function<std::vector<int>>(
        "--leads", [&args](std::vector<int> v) { args.overrides.lead_times = std::move(v); },
        "Override lead times");
}

uicast::ExperimentConfig resolve_config(const CommonArgs& args) {
    uicast::ExperimentConfig cfg;
    if (!args.config_path.empty() && !args.preset.empty())
        throw uicast::ConfigError("pass either --config or --preset, not both");
    if (!args.config_path.empty()) {
        cfg = uicast::load_experiment_config(args.config_path);
    } else if (!args.preset.empty()) {
        cfg = uicast::preset_config(args.preset);
    } else {
        throw uicast::ConfigError("one of --config or --preset is required");
    }
    if (!args.data.empty()) cfg.csv_path = args.data;
    if (args.seed) cfg.seed = *args.seed;
    uicast::apply_overrides(cfg, args.overrides);
    cfg.validate();
    return cfg;
}

uicast::RunOptions resolve_options(const CommonArgs& args) {
    uicast::RunOptions opts;
    opts.output_dir = args.output_dir;
    opts.threads = args.threads > 0 ? args.threads : uicast::default_threads();
    return opts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic time-series forecasting with missing data via iterative conditional imputation"};
    app.require_subcommand(1);

    CommonArgs sim_args, exp_args, train_args;
    std::string model_path, forecast_csv, forecast_dir, truth_csv;
    std::string stage_out = "out";
    int stage_threads = 0;
    std::optional<double> from_fraction;

    auto* simulate = app.add_subcommand("simulate", "Generate synthetic series with injected missingness");
    add_common(simulate, sim_args, false);

    auto* train = app.add_subcommand("train", "Fit models on a case-mode config and save them");
    add_common(train, train_args, true);

    auto* forecast = app.add_subcommand("forecast", "Issue forecasts from a saved model over a CSV");
    forecast->add_option("--model", model_path, "Model file from 'train'")->required();
    forecast->add_option("--data", forecast_csv, "Series CSV")->required();
    forecast->add_option("--out", stage_out, "Output directory")->capture_default_str();
    forecast->add_option("--threads", stage_threads, "Worker threads (0 = hardware)");
    forecast->add_option_function<double>(
        "--from", [&from_fraction](double v) { from_fraction = v; },
        "Only issue forecasts for targets past this fraction of the series");

    auto* evaluate = app.add_subcommand("evaluate", "Score forecast files against observed data");
    evaluate->add_option("--forecasts", forecast_dir, "Directory with forecasts/samples files")->required();
    evaluate->add_option("--truth", truth_csv, "Observed series CSV")->required();
    evaluate->add_option("--out", stage_out, "Output directory")->capture_default_str();

    auto* experiment = app.add_subcommand("experiment", "Run a full study end to end");
    add_common(experiment, exp_args, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const auto cfg = resolve_config(sim_args);
            std::cout << uicast::run_simulate_emit(cfg, resolve_options(sim_args)) << '\n';
        } else if (train->parsed()) {
            const auto cfg = resolve_config(train_args);
            std::cout << uicast::run_train(cfg, resolve_options(train_args)) << '\n';
        } else if (forecast->parsed()) {
            uicast::RunOptions opts;
            opts.output_dir = stage_out;
            opts.threads = stage_threads > 0 ? stage_threads : uicast::default_threads();
            std::cout << uicast::run_forecast(model_path, forecast_csv, opts, from_fraction) << '\n';
        } else if (evaluate->parsed()) {
            uicast::RunOptions opts;
            opts.output_dir = stage_out;
            std::cout << uicast::run_evaluate(forecast_dir, truth_csv, opts) << '\n';
        } else if (experiment->parsed()) {
            const auto cfg = resolve_config(exp_args);
            const auto opts = resolve_options(exp_args);
            std::cout << (cfg.mode == "simulation" ? uicast::run_simulation_study(cfg, opts)
                                                   : uicast::run_case_study(cfg, opts))
                      << '\n';
        }
    } catch (const uicast::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const uicast::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

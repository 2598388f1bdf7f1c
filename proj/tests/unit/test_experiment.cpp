#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uicast/errors.hpp"
#include "uicast/experiment.hpp"
#include "uicast/model_io.hpp"
#include "uicast/series.hpp"
#include "uicast/simulate.hpp"

using namespace uicast;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Bounded synthetic "power" series: squashed AR values in (0, 1).
std::vector<SiteSeries> bounded_series(int sites, int length, std::uint64_t seed) {
    std::vector<SiteSeries> out;
    for (int s = 0; s < sites; ++s) {
        ArSpec spec;
        spec.length = length;
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(s)}));
        SiteSeries raw = gen_ar(spec, rng);
        raw.site_id = "site_" + std::to_string(s + 1);
        const double mu = 1.0 / 0.17;
        for (auto& v : raw.values) v = 1.0 / (1.0 + std::exp(-(v - mu) / 0.3));
        out.push_back(std::move(raw));
    }
    return out;
}

std::string write_bounded_csv(const std::string& dir, int sites, int length, std::uint64_t seed) {
    const std::string path = (fs::path(dir) / "data.csv").string();
    write_series_csv(path, bounded_series(sites, length, seed));
    return path;
}

ExperimentConfig small_case_config(const std::string& csv) {
    ExperimentConfig cfg = preset_config("case1-20");
    cfg.csv_path = csv;
    cfg.seed = 11;
    cfg.lags = 3;
    cfg.lead_times = {1};
    cfg.methods = {"fcs", "climatology"};
    cfg.fcs.iterations = 2;
    cfg.fcs.operational_iterations = 2;
    cfg.fcs.impute_count = 10;
    cfg.fcs.forest.trees = 4;
    cfg.fcs.forest.min_node_size = 5;
    return cfg;
}

}  // namespace

TEST_CASE("experiment config json round trip and hashing") {
    ExperimentConfig cfg = preset_config("case3-aux");
    cfg.csv_path = "data.csv";
    const std::string dir = temp_dir("uicast_cfg");
    const std::string path = dir + "/cfg.json";
    save_experiment_config(cfg, path);
    const ExperimentConfig back = load_experiment_config(path);
    CHECK(config_canonical_json(back) == config_canonical_json(cfg));
    CHECK(config_hash(back) == config_hash(cfg));

    ExperimentConfig other = cfg;
    other.seed += 1;
    CHECK(config_hash(other) != config_hash(cfg));
    fs::remove_all(dir);
}

TEST_CASE("config validation rejects bad setups") {
    ExperimentConfig cfg = preset_config("ar-study");
    cfg.methods.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = preset_config("ar-study");
    cfg.methods = {"nonsense"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = preset_config("case1-10");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // csv_path unset

    cfg = preset_config("ar-study");
    cfg.mode = "weird";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = preset_config("ar-study");
    cfg.missing_rates = {0.7};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = preset_config("ar-study");
    cfg.methods = {"retrain"};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no patterns given

    CHECK_THROWS_AS(preset_config("nope"), ConfigError);
}

TEST_CASE("all presets produce valid configs") {
    for (const auto& name : preset_names()) {
        ExperimentConfig cfg = preset_config(name);
        if (cfg.mode == "case") cfg.csv_path = "placeholder.csv";
        CHECK_NOTHROW(cfg.validate());
    }
}

TEST_CASE("simulation study: deterministic manifests, serial equals threaded") {
    ExperimentConfig cfg = preset_config("ar-study");
    cfg.seed = 5;
    ScaleOverrides ov;
    ov.length = 300;
    ov.replicates = 2;
    ov.trees = 4;
    ov.iterations = 2;
    ov.missing_rates = std::vector<double>{0.1, 0.3};
    apply_overrides(cfg, ov);

    const std::string d1 = temp_dir("uicast_sim1");
    const std::string d2 = temp_dir("uicast_sim2");
    RunOptions o1;
    o1.output_dir = d1;
    o1.threads = 1;
    RunOptions o2;
    o2.output_dir = d2;
    o2.threads = 4;
    const std::string m1 = run_simulation_study(cfg, o1);
    const std::string m2 = run_simulation_study(cfg, o2);
    CHECK(read_file(m1) == read_file(m2));
    CHECK(read_file(d1 + "/rmse_by_rate.csv") == read_file(d2 + "/rmse_by_rate.csv"));

    // 2 rates x 2 replicates, one method.
    std::istringstream csv(read_file(d1 + "/rmse_by_rate.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 5);  // header + 4 rows
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("var scenarios run and keep the scenario column") {
    ExperimentConfig cfg = preset_config("var-study");
    cfg.seed = 6;
    ScaleOverrides ov;
    ov.length = 260;
    ov.replicates = 1;
    ov.trees = 3;
    ov.iterations = 2;
    ov.missing_rates = std::vector<double>{0.2};
    apply_overrides(cfg, ov);

    const std::string dir = temp_dir("uicast_var");
    RunOptions opts;
    opts.output_dir = dir;
    opts.threads = 2;
    run_simulation_study(cfg, opts);
    const std::string csv = read_file(dir + "/rmse_by_rate.csv");
    CHECK(csv.find("both,") != std::string::npos);
    CHECK(csv.find("series1_only,") != std::string::npos);
    CHECK(csv.find("both_missing,") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("case study produces tables, diagram data, and a manifest") {
    const std::string dir = temp_dir("uicast_case");
    const std::string csv = write_bounded_csv(dir, 1, 400, 21);
    ExperimentConfig cfg = small_case_config(csv);
    cfg.methods = {"persistence", "climatology", "rf_m", "rf_r", "rf_c", "fcs"};

    RunOptions opts;
    opts.output_dir = dir + "/out";
    opts.threads = 2;
    const std::string manifest_path = run_case_study(cfg, opts);
    const std::string manifest = read_file(manifest_path);
    CHECK(manifest.find("\"rmse\"") != std::string::npos);
    CHECK(manifest.find("config_hash") != std::string::npos);

    const std::string table = read_file(dir + "/out/rmse_table.csv");
    CHECK(table.find("lead,persistence,climatology,rf_m,rf_r,rf_c,fcs") == 0);
    CHECK(fs::exists(dir + "/out/reliability_h1_fcs.csv"));
    CHECK(fs::exists(dir + "/out/sharpness_h1_fcs.csv"));
    CHECK(fs::exists(dir + "/out/crps_table.csv"));

    // Determinism across reruns with a different thread count.
    RunOptions opts2;
    opts2.output_dir = dir + "/out2";
    opts2.threads = 1;
    run_case_study(cfg, opts2);
    CHECK(read_file(dir + "/out/manifest.json") == read_file(dir + "/out2/manifest.json"));
    CHECK(read_file(dir + "/out/rmse_table.csv") == read_file(dir + "/out2/rmse_table.csv"));
    fs::remove_all(dir);
}

TEST_CASE("train, forecast, evaluate compose to the case-study scores") {
    const std::string dir = temp_dir("uicast_staged");
    const std::string csv = write_bounded_csv(dir, 1, 400, 22);
    ExperimentConfig cfg = small_case_config(csv);
    cfg.methods = {"fcs"};

    RunOptions case_opts;
    case_opts.output_dir = dir + "/case";
    case_opts.threads = 2;
    run_case_study(cfg, case_opts);
    const auto manifest = read_file(dir + "/case/manifest.json");

    RunOptions train_opts;
    train_opts.output_dir = dir + "/stage";
    train_opts.threads = 2;
    run_train(cfg, train_opts);

    RunOptions fc_opts;
    fc_opts.output_dir = dir + "/stage/forecasts";
    fc_opts.threads = 2;
    run_forecast(dir + "/stage/model_h1.json", dir + "/stage/masked.csv", fc_opts, cfg.train_fraction);

    RunOptions ev_opts;
    ev_opts.output_dir = dir + "/stage/eval";
    const std::string summary_path =
        run_evaluate(dir + "/stage/forecasts", dir + "/stage/masked.csv", ev_opts);
    const std::string summary = read_file(summary_path);

    // Pull rmse/crps out of both JSON documents textually.
    auto extract = [](const std::string& text, const std::string& key) {
        const auto pos = text.find("\"" + key + "\"");
        REQUIRE(pos != std::string::npos);
        const auto colon = text.find(':', pos);
        return std::stod(text.substr(colon + 1));
    };
    const double case_rmse = extract(manifest, "rmse");
    const double case_crps = extract(manifest, "crps");
    const auto h1pos = summary.find("\"h1\"");
    REQUIRE(h1pos != std::string::npos);
    const double staged_rmse = extract(summary.substr(summary.find("\"rmse\"")), "h1");
    const double staged_crps = extract(summary.substr(summary.find("\"crps\"")), "h1");
    CHECK(staged_rmse == doctest::Approx(case_rmse).epsilon(1e-12));
    CHECK(staged_crps == doctest::Approx(case_crps).epsilon(1e-12));
    fs::remove_all(dir);
}

TEST_CASE("forecast rejects a model/data site mismatch with a config error") {
    const std::string dir = temp_dir("uicast_mismatch");
    const std::string csv = write_bounded_csv(dir, 1, 300, 23);
    ExperimentConfig cfg = small_case_config(csv);
    cfg.methods = {"fcs"};
    RunOptions topts;
    topts.output_dir = dir + "/t";
    run_train(cfg, topts);

    const std::string two_site = (fs::path(dir) / "two.csv").string();
    write_series_csv(two_site, bounded_series(2, 300, 24));
    RunOptions fopts;
    fopts.output_dir = dir + "/f";
    CHECK_THROWS_AS(run_forecast(dir + "/t/model_h1.json", two_site, fopts, 0.8), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("evaluate on an empty or absent forecast directory fails") {
    const std::string dir = temp_dir("uicast_evalfail");
    const std::string csv = write_bounded_csv(dir, 1, 300, 25);
    RunOptions opts;
    opts.output_dir = dir + "/out";
    CHECK_THROWS(static_cast<void>(run_evaluate(dir + "/missing", csv, opts)));

    fs::create_directories(dir + "/empty");
    CHECK_THROWS_AS(static_cast<void>(run_evaluate(dir + "/empty", csv, opts)), DataError);
    fs::remove_all(dir);
}

TEST_CASE("simulate emits series, mask, complete files that agree") {
    ExperimentConfig cfg = preset_config("ar-study");
    cfg.seed = 9;
    ScaleOverrides ov;
    ov.length = 120;
    apply_overrides(cfg, ov);
    cfg.missingness.kind = "sporadic";
    cfg.missingness.rate = 0.25;

    const std::string dir = temp_dir("uicast_emit");
    RunOptions opts;
    opts.output_dir = dir;
    run_simulate_emit(cfg, opts);

    const auto complete = read_series_csv(dir + "/complete.csv");
    const auto masked = read_series_csv(dir + "/series.csv");
    REQUIRE(complete.size() == 1);
    REQUIRE(masked.size() == 1);
    std::size_t holes = 0;
    for (std::size_t i = 0; i < masked[0].size(); ++i) {
        if (masked[0].missing[i]) {
            ++holes;
        } else {
            CHECK(masked[0].values[i] == complete[0].values[i]);
        }
    }
    CHECK(holes > 0);
    CHECK(fs::exists(dir + "/mask.csv"));
    CHECK(fs::exists(dir + "/manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("operational pattern forces features missing on test rows") {
    const std::string dir = temp_dir("uicast_pattern");
    const std::string csv = write_bounded_csv(dir, 1, 360, 26);
    ExperimentConfig cfg = small_case_config(csv);
    cfg.methods = {"fcs", "retrain"};
    cfg.missingness.kind = "none";
    cfg.probabilistic = false;
    cfg.operational_pattern = "110";  // newest lag missing at issue time
    cfg.retrain_patterns = {"110"};

    RunOptions opts;
    opts.output_dir = dir + "/out";
    const std::string path = run_case_study(cfg, opts);
    const std::string manifest = read_file(path);
    CHECK(manifest.find("retrain") != std::string::npos);
    fs::remove_all(dir);
}

#include "uicast/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "uicast/errors.hpp"
#include "uicast/parallel.hpp"
#include "text_util.hpp"

namespace uicast {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownMethods{"fcs", "persistence", "climatology", "rf_m",
                                          "rf_r", "rf_c", "retrain"};

}  // namespace

void MissingnessConfig::validate() const {
    if (kind != "none" && kind != "sporadic" && kind != "block")
        throw ConfigError("missingness: unknown kind '" + kind + "'");
    if (kind == "sporadic" && !(rate >= 0.0 && rate <= 0.5))
        throw ConfigError("missingness: sporadic rate must lie in [0, 0.5]");
    if (kind == "block" && (block.count < 1 || block.len_min < 1 || block.len_min > block.len_max))
        throw ConfigError("missingness: block spec needs count >= 1 and 1 <= len_min <= len_max");
}

void ExperimentConfig::validate() const {
    if (mode != "simulation" && mode != "case")
        throw ConfigError("config: mode must be 'simulation' or 'case'");
    if (methods.empty()) throw ConfigError("config: method list is empty");
    for (const auto& m : methods)
        if (!kKnownMethods.count(m)) throw ConfigError("config: unknown method '" + m + "'");
    if (mode == "simulation") {
        if (process != "ar" && process != "var")
            throw ConfigError("config: process must be 'ar' or 'var'");
        if (process == "var") {
            if (var_scenarios.empty()) throw ConfigError("config: var_scenarios is empty");
            for (const auto& s : var_scenarios)
                if (s != "both" && s != "series1_only" && s != "both_missing")
                    throw ConfigError("config: unknown var scenario '" + s + "'");
        }
        if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
        for (double r : missing_rates)
            if (!(r >= 0.0 && r <= 0.5)) throw ConfigError("config: missing rates must lie in [0, 0.5]");
    } else {
        if (csv_path.empty()) throw ConfigError("config: case mode needs csv_path");
    }
    if (lags < 1) throw ConfigError("config: lags must be >= 1");
    if (lead_times.empty()) throw ConfigError("config: lead_times is empty");
    for (int h : lead_times)
        if (h < 1) throw ConfigError("config: lead times must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("config: train_fraction must lie in (0, 1)");
    if (transform_enabled) transform.validate();
    missingness.validate();
    for (const auto& v : aux_variants) v.missingness.validate();
    for (char c : operational_pattern)
        if (c != '0' && c != '1') throw ConfigError("config: operational_pattern must be a 0/1 string");
    const bool wants_retrain = std::find(methods.begin(), methods.end(), "retrain") != methods.end();
    if (wants_retrain && retrain_patterns.empty())
        throw ConfigError("config: method 'retrain' needs retrain_patterns");
}

// ---------------------------------------------------------------------------
// JSON (de)serialization of the semantic config
// ---------------------------------------------------------------------------

namespace {

json missingness_to_json(const MissingnessConfig& m) {
    json j{{"kind", m.kind}};
    if (m.kind == "sporadic") j["rate"] = m.rate;
    if (m.kind == "block")
        j["block"] = json{{"count", m.block.count}, {"len_min", m.block.len_min}, {"len_max", m.block.len_max}};
    return j;
}

MissingnessConfig missingness_from_json(const json& j) {
    MissingnessConfig m;
    m.kind = j.at("kind").get<std::string>();
    if (j.contains("rate")) m.rate = j.at("rate").get<double>();
    if (j.contains("block")) {
        m.block.count = j.at("block").at("count").get<int>();
        m.block.len_min = j.at("block").at("len_min").get<int>();
        m.block.len_max = j.at("block").at("len_max").get<int>();
    }
    return m;
}

json fcs_to_json(const FcsConfig& f) {
    return json{{"iterations", f.iterations},
                {"operational_iterations", f.operational_iterations},
                {"impute_count", f.impute_count},
                {"donors", f.donors},
                {"column_order", f.column_order},
                {"forest", json{{"trees", f.forest.trees},
                                {"min_node_size", f.forest.min_node_size},
                                {"mtry", f.forest.mtry},
                                {"bootstrap", f.forest.bootstrap}}},
                {"column_mean_init", f.column_mean_init}};
}

FcsConfig fcs_from_json(const json& j) {
    FcsConfig f;
    f.iterations = j.at("iterations").get<int>();
    f.operational_iterations = j.at("operational_iterations").get<int>();
    f.impute_count = j.at("impute_count").get<int>();
    f.donors = j.at("donors").get<int>();
    f.column_order = j.at("column_order").get<std::vector<int>>();
    f.forest.trees = j.at("forest").at("trees").get<int>();
    f.forest.min_node_size = j.at("forest").at("min_node_size").get<int>();
    f.forest.mtry = j.at("forest").at("mtry").get<int>();
    f.forest.bootstrap = j.at("forest").at("bootstrap").get<bool>();
    f.column_mean_init = j.at("column_mean_init").get<bool>();
    return f;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["mode"] = c.mode;
    j["seed"] = c.seed;
    j["csv_path"] = c.csv_path;
    j["process"] = c.process;
    j["ar"] = json{{"alpha", c.ar.alpha},
                   {"noise_var", c.ar.noise_var},
                   {"length", c.ar.length},
                   {"burn_in", c.ar.burn_in}};
    j["var"] = json{{"eq1", c.var.eq1},
                    {"eq2", c.var.eq2},
                    {"noise_var", c.var.noise_var},
                    {"length", c.var.length},
                    {"burn_in", c.var.burn_in}};
    j["var_scenarios"] = c.var_scenarios;
    j["transform_enabled"] = c.transform_enabled;
    j["transform"] = json{{"nu", c.transform.nu}, {"eps", c.transform.eps}};
    j["lags"] = c.lags;
    j["target_site"] = c.target_site;
    j["lead_times"] = c.lead_times;
    j["missingness"] = missingness_to_json(c.missingness);
    json variants = json::array();
    for (const auto& v : c.aux_variants)
        variants.push_back(json{{"label", v.label},
                                {"use_aux", v.use_aux},
                                {"missingness", missingness_to_json(v.missingness)}});
    j["aux_variants"] = std::move(variants);
    j["operational_pattern"] = c.operational_pattern;
    j["methods"] = c.methods;
    j["retrain_patterns"] = c.retrain_patterns;
    j["fcs"] = fcs_to_json(c.fcs);
    j["replicates"] = c.replicates;
    j["missing_rates"] = c.missing_rates;
    j["train_fraction"] = c.train_fraction;
    j["probabilistic"] = c.probabilistic;
    j["climatology_max_samples"] = c.climatology_max_samples;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    c.name = j.at("name").get<std::string>();
    c.mode = j.at("mode").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.csv_path = j.value("csv_path", std::string{});
    c.process = j.value("process", std::string{"ar"});
    if (j.contains("ar")) {
        c.ar.alpha = j.at("ar").at("alpha").get<std::array<double, 3>>();
        c.ar.noise_var = j.at("ar").at("noise_var").get<double>();
        c.ar.length = j.at("ar").at("length").get<int>();
        c.ar.burn_in = j.at("ar").at("burn_in").get<int>();
    }
    if (j.contains("var")) {
        c.var.eq1 = j.at("var").at("eq1").get<std::array<double, 5>>();
        c.var.eq2 = j.at("var").at("eq2").get<std::array<double, 5>>();
        c.var.noise_var = j.at("var").at("noise_var").get<double>();
        c.var.length = j.at("var").at("length").get<int>();
        c.var.burn_in = j.at("var").at("burn_in").get<int>();
    }
    c.var_scenarios = j.value("var_scenarios", std::vector<std::string>{"both"});
    c.transform_enabled = j.value("transform_enabled", false);
    if (j.contains("transform")) {
        c.transform.nu = j.at("transform").at("nu").get<double>();
        c.transform.eps = j.at("transform").at("eps").get<double>();
    }
    c.lags = j.value("lags", 6);
    c.target_site = j.value("target_site", 0);
    c.lead_times = j.value("lead_times", std::vector<int>{1});
    if (j.contains("missingness")) c.missingness = missingness_from_json(j.at("missingness"));
    c.aux_variants.clear();
    for (const auto& vj : j.value("aux_variants", json::array())) {
        AuxVariant v;
        v.label = vj.at("label").get<std::string>();
        v.use_aux = vj.at("use_aux").get<bool>();
        v.missingness = missingness_from_json(vj.at("missingness"));
        c.aux_variants.push_back(std::move(v));
    }
    c.operational_pattern = j.value("operational_pattern", std::string{});
    c.methods = j.at("methods").get<std::vector<std::string>>();
    c.retrain_patterns = j.value("retrain_patterns", std::vector<std::string>{});
    if (j.contains("fcs")) c.fcs = fcs_from_json(j.at("fcs"));
    c.replicates = j.value("replicates", 100);
    c.missing_rates = j.value("missing_rates", std::vector<double>{});
    c.train_fraction = j.value("train_fraction", 0.8);
    c.probabilistic = j.value("probabilistic", true);
    c.climatology_max_samples = j.value("climatology_max_samples", std::size_t{10000});
    return c;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    try {
        ExperimentConfig cfg = config_from_json(j);
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + " is malformed: " + e.what());
    }
}

void save_experiment_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open config file for writing: " + path);
    out << config_to_json(cfg).dump(2) << '\n';
    if (!out) throw DataError("config write failed: " + path);
}

std::string config_canonical_json(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) {
    return detail::fnv1a_hex(config_canonical_json(cfg));
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

std::vector<std::string> preset_names() {
    return {"ar-study", "var-study", "case1-20", "case1-10", "case2-block", "case3-aux"};
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    c.fcs.forest.trees = 100;
    if (name == "ar-study") {
        c.mode = "simulation";
        c.process = "ar";
        c.lags = 2;
        c.lead_times = {1};
        c.methods = {"fcs"};
        c.probabilistic = false;
        c.replicates = 100;
        c.missingness.kind = "sporadic";
        c.missing_rates = {0.05, 0.10, 0.20, 0.30, 0.40, 0.50};
        return c;
    }
    if (name == "var-study") {
        c.mode = "simulation";
        c.process = "var";
        c.var_scenarios = {"both", "series1_only", "both_missing"};
        c.lags = 2;
        c.lead_times = {1};
        c.methods = {"fcs"};
        c.probabilistic = false;
        c.replicates = 100;
        c.missingness.kind = "sporadic";
        c.missing_rates = {0.05, 0.10, 0.20, 0.30, 0.40, 0.50};
        return c;
    }
    if (name == "case1-20" || name == "case1-10") {
        c.mode = "case";
        c.transform_enabled = true;
        c.lags = 6;
        c.lead_times = {1, 2, 3, 6};
        c.methods = {"persistence", "climatology", "rf_m", "rf_r", "rf_c", "fcs"};
        c.probabilistic = true;
        c.missingness.kind = "sporadic";
        c.missingness.rate = name == "case1-20" ? 0.20 : 0.10;
        return c;
    }
    if (name == "case2-block") {
        c.mode = "case";
        c.transform_enabled = true;
        c.lags = 6;
        c.lead_times = {1, 2, 3, 6};
        c.methods = {"persistence", "climatology", "rf_m", "rf_r", "rf_c", "fcs"};
        c.probabilistic = true;
        c.missingness.kind = "block";
        c.missingness.block = BlockSpec{600, 5, 30};
        return c;
    }
    if (name == "case3-aux") {
        c.mode = "case";
        c.transform_enabled = true;
        c.lags = 6;
        c.lead_times = {1};
        c.methods = {"climatology", "fcs"};
        c.probabilistic = true;
        c.missingness.kind = "sporadic";
        c.missingness.rate = 0.20;
        auto sporadic = [](double rate) {
            MissingnessConfig m;
            m.kind = rate > 0.0 ? "sporadic" : "none";
            m.rate = rate;
            return m;
        };
        c.aux_variants = {{"no_afs", false, sporadic(0.0)},
                          {"afs", true, sporadic(0.0)},
                          {"afs_5m", true, sporadic(0.05)},
                          {"afs_10m", true, sporadic(0.10)},
                          {"afs_20m", true, sporadic(0.20)}};
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

void apply_overrides(ExperimentConfig& cfg, const ScaleOverrides& ov) {
    if (ov.length) {
        cfg.ar.length = *ov.length;
        cfg.var.length = *ov.length;
    }
    if (ov.replicates) cfg.replicates = *ov.replicates;
    if (ov.trees) cfg.fcs.forest.trees = *ov.trees;
    if (ov.impute_count) cfg.fcs.impute_count = *ov.impute_count;
    if (ov.iterations) {
        cfg.fcs.iterations = *ov.iterations;
        cfg.fcs.operational_iterations = *ov.iterations;
    }
    if (ov.mtry) cfg.fcs.forest.mtry = *ov.mtry;
    if (ov.donors) cfg.fcs.donors = *ov.donors;
    if (ov.missing_rates) cfg.missing_rates = *ov.missing_rates;
    if (ov.lead_times) cfg.lead_times = *ov.lead_times;
}

// ---------------------------------------------------------------------------
// Fitting and scoring one dataset
// ---------------------------------------------------------------------------

namespace {

struct TestRow {
    Eigen::VectorXd features;   // model domain, length pk; NaN where masked
    MaskVector feature_mask;    // length pk
    std::int64_t issue_time = 0;
    std::int64_t target_time = 0;
    bool target_observed = false;
    double observed = 0.0;      // original domain, valid when target_observed
};

ObservationMatrix matrix_rows(const ObservationMatrix& all, const std::vector<int>& keep) {
    ObservationMatrix out;
    out.column_roles = all.column_roles;
    out.z.resize(static_cast<Eigen::Index>(keep.size()), all.cols());
    out.m.resize(static_cast<Eigen::Index>(keep.size()), all.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.z.row(static_cast<Eigen::Index>(i)) = all.z.row(keep[i]);
        out.m.row(static_cast<Eigen::Index>(i)) = all.m.row(keep[i]);
        out.issue_times.push_back(all.issue_times[static_cast<std::size_t>(keep[i])]);
        out.target_times.push_back(all.target_times[static_cast<std::size_t>(keep[i])]);
    }
    return out;
}

std::size_t time_to_index(const SiteSeries& s, std::int64_t t) {
    const std::int64_t step = s.timestamps.size() > 1 ? s.timestamps[1] - s.timestamps[0] : 1;
    return static_cast<std::size_t>((t - s.timestamps.front()) / step);
}

double maybe_inverse(double v, const std::optional<TransformSpec>& tf) {
    return tf ? glogit_inverse(v, *tf) : v;
}

// Scores many observations against one fixed distribution (climatology)
// without copying it per row: CRPS in O(log L) per observation via prefix
// sums over the sorted samples.
struct SharedDistScorer {
    explicit SharedDistScorer(const PredictiveDistribution& dist) : dist_(dist) {
        const auto& x = dist.samples;  // already sorted
        prefix_.resize(x.size() + 1, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) prefix_[i + 1] = prefix_[i] + x[i];
        double pair_sum = 0.0;
        const double n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            pair_sum += (2.0 * static_cast<double>(i) - n + 1.0) * x[i];
        pair_term_ = pair_sum / (n * n);
    }

    double crps(double y) const {
        const auto& x = dist_.samples;
        const double n = static_cast<double>(x.size());
        const auto k = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), y) - x.begin());
        const double below = static_cast<double>(k) * y - prefix_[k];
        const double above = (prefix_.back() - prefix_[k]) - (n - static_cast<double>(k)) * y;
        return (below + above) / n - pair_term_;
    }

    const PredictiveDistribution& dist_;
    std::vector<double> prefix_;
    double pair_term_ = 0.0;
};

}  // namespace

std::vector<MethodResult> run_methods(const DatasetRun& run) {
    run.spec.validate();
    if (run.masked.empty()) throw DataError("run_methods: no series");
    if (static_cast<int>(run.masked.size()) != run.spec.sites)
        throw DataError("run_methods: series count does not match the embedding spec");
    if (run.methods.empty()) throw ConfigError("run_methods: no methods requested");

    const int pk = run.spec.sites * run.spec.lags;
    const int target_col = pk;
    const auto& target_series = run.masked[static_cast<std::size_t>(run.spec.target_site)];

    // Model-domain series (transformed when configured).
    std::vector<SiteSeries> model_series = run.masked;
    if (run.transform)
        for (auto& s : model_series) transform_series(s, *run.transform);

    const ObservationMatrix all = build_training_matrix(model_series, run.spec);

    const auto series_len = static_cast<std::size_t>(target_series.size());
    const std::size_t split_pos = static_cast<std::size_t>(run.train_fraction * static_cast<double>(series_len));
    if (split_pos == 0 || split_pos >= series_len)
        throw DataError("run_methods: train fraction leaves an empty split");
    const std::int64_t split_ts = target_series.timestamps[split_pos];

    std::vector<int> train_idx, test_idx;
    for (Eigen::Index r = 0; r < all.rows(); ++r) {
        if (all.target_times[static_cast<std::size_t>(r)] < split_ts)
            train_idx.push_back(static_cast<int>(r));
        else
            test_idx.push_back(static_cast<int>(r));
    }
    if (train_idx.empty() || test_idx.empty())
        throw DataError("run_methods: chronological split produced an empty train or test set");

    const ObservationMatrix train = matrix_rows(all, train_idx);

    // Forced operational missingness on top of the data mask.
    MaskVector forced(static_cast<std::size_t>(pk), 0);
    if (!run.operational_pattern.empty()) {
        if (static_cast<int>(run.operational_pattern.size()) != pk)
            throw ConfigError("run_methods: operational_pattern length != feature count");
        for (int i = 0; i < pk; ++i)
            forced[static_cast<std::size_t>(i)] = run.operational_pattern[static_cast<std::size_t>(i)] == '1';
    }

    std::vector<TestRow> tests;
    tests.reserve(test_idx.size());
    for (int r : test_idx) {
        TestRow t;
        t.features = all.z.row(r).head(pk).transpose();
        t.feature_mask.resize(static_cast<std::size_t>(pk));
        for (int j = 0; j < pk; ++j) {
            const bool miss = all.m(r, j) != 0 || forced[static_cast<std::size_t>(j)] != 0;
            t.feature_mask[static_cast<std::size_t>(j)] = miss ? 1 : 0;
            if (miss) t.features(j) = std::numeric_limits<double>::quiet_NaN();
        }
        t.issue_time = all.issue_times[static_cast<std::size_t>(r)];
        t.target_time = all.target_times[static_cast<std::size_t>(r)];
        t.target_observed = all.m(r, target_col) == 0;
        if (t.target_observed)
            t.observed = target_series.values[time_to_index(target_series, t.target_time)];
        tests.push_back(std::move(t));
    }

    // Original-domain observed target history in the training period.
    std::vector<double> history;
    for (std::size_t i = 0; i < split_pos; ++i)
        if (!target_series.missing[i]) history.push_back(target_series.values[i]);

    std::vector<MethodResult> results;
    results.reserve(run.methods.size());

    for (const auto& method : run.methods) {
        MethodResult res;
        res.method = method;

        std::vector<double> points(tests.size(), std::numeric_limits<double>::quiet_NaN());
        std::vector<PredictiveDistribution> dists;
        const bool probabilistic = run.probabilistic && method == "fcs";
        if (probabilistic) dists.resize(tests.size());

        if (method == "fcs") {
            FcsConfig fc = run.fcs;
            FcsFitResult fit = fit_fcs_engine(train, fc, ImputePolicy::Draw, run.threads);
            fit.model.embedding = run.spec;
            fit.model.transform = run.transform;
            const FcsModel& model = fit.model;

            parallel_for(tests.size(), run.threads, [&](std::size_t i) {
                const auto& t = tests[i];
                Eigen::VectorXd row(pk + 1);
                row.head(pk) = t.features;
                row(pk) = std::numeric_limits<double>::quiet_NaN();
                MaskVector mask = t.feature_mask;
                mask.push_back(1);
                const std::uint64_t row_seed =
                    derive_seed(fc.seed, {kSeedOperational, static_cast<std::uint64_t>(i)});
                if (probabilistic) {
                    auto reps = impute_row(model, row, mask, fc.operational_iterations, fc.impute_count,
                                           row_seed, ImputePolicy::Draw);
                    dists[i] = extract_target_samples(reps, run.transform, t.issue_time, run.spec.lead,
                                                      run.spec.target_site);
                    points[i] = dists[i].mean();
                } else {
                    const Eigen::VectorXd done = impute_row_replicate(model, row, mask,
                                                                      fc.operational_iterations, row_seed,
                                                                      ImputePolicy::Mean);
                    points[i] = maybe_inverse(done(pk), run.transform);
                }
            });
        } else if (method == "rf_m" || method == "rf_r" || method == "rf_c") {
            const ItpKind kind = method == "rf_m"   ? ItpKind::MeanImpute
                                 : method == "rf_r" ? ItpKind::RegressionImpute
                                                    : ItpKind::CompleteData;
            ObservationMatrix itp_train = train;
            std::vector<TestRow> itp_tests = tests;
            if (kind == ItpKind::CompleteData) {
                if (run.complete.empty())
                    throw ConfigError("rf_c needs complete ground-truth series");
                std::vector<SiteSeries> complete_model = run.complete;
                if (run.transform)
                    for (auto& s : complete_model) transform_series(s, *run.transform);
                const ObservationMatrix call = build_training_matrix(complete_model, run.spec);
                std::vector<int> ctrain;
                std::map<std::int64_t, int> by_target_time;
                for (Eigen::Index r = 0; r < call.rows(); ++r) {
                    if (call.target_times[static_cast<std::size_t>(r)] < split_ts)
                        ctrain.push_back(static_cast<int>(r));
                    else
                        by_target_time[call.target_times[static_cast<std::size_t>(r)]] = static_cast<int>(r);
                }
                itp_train = matrix_rows(call, ctrain);
                // Complete features aligned to the masked verification rows
                // by target time (the masked embedding may have dropped
                // fully-missing rows).
                for (auto& t : itp_tests) {
                    const auto it = by_target_time.find(t.target_time);
                    if (it == by_target_time.end())
                        throw DataError("rf_c: complete data lacks a row for a verification target");
                    t.features = call.z.row(it->second).head(pk).transpose();
                    std::fill(t.feature_mask.begin(), t.feature_mask.end(), 0);
                }
            }
            ItpForecaster forecaster = ItpForecaster::fit(itp_train, kind, run.fcs, run.threads);
            parallel_for(itp_tests.size(), run.threads, [&](std::size_t i) {
                points[i] = maybe_inverse(forecaster.predict(itp_tests[i].features, itp_tests[i].feature_mask),
                                          run.transform);
            });
        } else if (method == "persistence") {
            double fallback = 0.0;
            if (!history.empty()) {
                for (double v : history) fallback += v;
                fallback /= static_cast<double>(history.size());
            }
            const int k = run.spec.lags;
            for (std::size_t i = 0; i < tests.size(); ++i) {
                SiteWindow w;
                w.values.resize(static_cast<std::size_t>(k));
                w.missing.resize(static_cast<std::size_t>(k));
                const std::size_t issue = time_to_index(target_series, tests[i].issue_time);
                for (int lag = 0; lag < k; ++lag) {
                    const std::size_t idx = issue - static_cast<std::size_t>(k - 1 - lag);
                    w.values[static_cast<std::size_t>(lag)] = target_series.values[idx];
                    w.missing[static_cast<std::size_t>(lag)] = target_series.missing[idx];
                }
                bool used_fallback = false;
                points[i] = persistence_forecast(w, fallback, &used_fallback);
                res.persistence_fallbacks += used_fallback;
            }
        } else if (method == "climatology") {
            const PredictiveDistribution climo = climatology_distribution(history, run.climatology_max_samples);
            const double m = climo.mean();
            for (std::size_t i = 0; i < tests.size(); ++i) points[i] = m;
            if (run.probabilistic) {
                // One fixed distribution for every issue time; score it
                // against each observation without materializing copies.
                const SharedDistScorer scorer(climo);
                double crps_sum = 0.0;
                std::size_t scored = 0;
                const auto levels = default_reliability_levels();
                std::vector<std::size_t> covered(levels.size(), 0);
                std::vector<double> level_q(levels.size());
                for (std::size_t q = 0; q < levels.size(); ++q) level_q[q] = climo.quantile(levels[q]);
                for (const auto& t : tests) {
                    if (!t.target_observed) continue;
                    ++scored;
                    crps_sum += scorer.crps(t.observed);
                    for (std::size_t q = 0; q < levels.size(); ++q)
                        covered[q] += t.observed <= level_q[q];
                }
                if (scored > 0) {
                    res.crps = crps_sum / static_cast<double>(scored);
                    res.has_crps = true;
                    double dev = 0.0;
                    for (std::size_t q = 0; q < levels.size(); ++q) {
                        const double emp = static_cast<double>(covered[q]) / static_cast<double>(scored);
                        res.reliability.push_back({levels[q], emp});
                        dev += std::abs(emp - levels[q]);
                    }
                    res.reliability_deviation = dev / static_cast<double>(levels.size()) * 100.0;
                    for (double c : default_sharpness_coverages()) {
                        const double beta = 1.0 - c;
                        res.sharpness.push_back(
                            {c, climo.quantile(1.0 - beta / 2.0) - climo.quantile(beta / 2.0)});
                    }
                }
            }
        } else if (method == "retrain") {
            std::vector<PatternKey> patterns;
            for (const auto& p : run.retrain_patterns) {
                PatternKey key;
                for (char ch : p) key.observed.push_back(ch == '1');
                patterns.push_back(std::move(key));
            }
            PatternForecasters forecasters =
                PatternForecasters::fit(train, patterns, run.fcs.forest, 1, run.threads);
            parallel_for(tests.size(), run.threads, [&](std::size_t i) {
                points[i] = maybe_inverse(forecasters.predict(tests[i].features, tests[i].feature_mask),
                                          run.transform);
            });
        } else {
            throw ConfigError("run_methods: unknown method '" + method + "'");
        }

        PointVerification pv;
        ProbVerification bv;
        for (std::size_t i = 0; i < tests.size(); ++i) {
            if (!tests[i].target_observed) continue;
            pv.forecast.push_back(points[i]);
            pv.observed.push_back(tests[i].observed);
            if (probabilistic) {
                bv.forecast.push_back(dists[i]);
                bv.observed.push_back(tests[i].observed);
            }
        }
        res.scored = pv.forecast.size();
        if (!pv.forecast.empty()) {
            res.rmse = rmse(pv);
            res.has_rmse = true;
        }
        if (probabilistic && !bv.forecast.empty()) {
            res.crps = mean_crps(bv);
            res.has_crps = true;
            const auto rel = reliability_diagram(bv, default_reliability_levels());
            res.reliability = rel.points;
            res.reliability_deviation = rel.deviation_percent;
            res.sharpness = sharpness(bv, default_sharpness_coverages());
        }
        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace uicast

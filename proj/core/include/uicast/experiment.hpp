#pragma once

#include <optional>
#include <string>
#include <vector>

#include "uicast/baselines.hpp"
#include "uicast/embedding.hpp"
#include "uicast/fcs.hpp"
#include "uicast/metrics.hpp"
#include "uicast/simulate.hpp"

namespace uicast {

struct MissingnessConfig {
    std::string kind = "none";  // none | sporadic | block
    double rate = 0.0;          // sporadic
    BlockSpec block;            // block

    void validate() const;
};

/// One case-3 style variant: which auxiliary sites to use and what
/// missingness to inject into them.
struct AuxVariant {
    std::string label = "default";
    bool use_aux = true;
    MissingnessConfig missingness;
};

/// The semantic description of an experiment. Everything here feeds the
/// manifest and its hash; execution knobs (threads, output paths) live in
/// RunOptions instead so reruns stay byte-comparable.
struct ExperimentConfig {
    std::string name = "custom";
    std::string mode = "case";  // "simulation" | "case"
    std::uint64_t seed = 1;

    // Data source: CSV for case mode, synthetic process for simulation mode.
    std::string csv_path;
    std::string process = "ar";  // ar | var
    ArSpec ar;
    VarSpec var;
    std::vector<std::string> var_scenarios{"both"};  // both | series1_only | both_missing

    bool transform_enabled = false;
    TransformSpec transform;

    int lags = 6;
    int target_site = 0;
    std::vector<int> lead_times{1};

    MissingnessConfig missingness;       // target site (case) / series 1 (simulation)
    std::vector<AuxVariant> aux_variants;  // case mode; empty = single all-sites variant
    std::string operational_pattern;     // optional '0'/'1' feature pattern forced missing on test rows

    std::vector<std::string> methods{"fcs"};
    std::vector<std::string> retrain_patterns;

    FcsConfig fcs;
    int replicates = 100;                // simulation mode
    std::vector<double> missing_rates;   // simulation mode grid; empty = {missingness.rate}
    double train_fraction = 0.8;
    bool probabilistic = true;
    std::size_t climatology_max_samples = 10000;

    void validate() const;
};

/// Execution-only knobs, excluded from manifests and config hashes.
struct RunOptions {
    std::string output_dir = "out";
    int threads = 1;
    bool verbose = false;
};

ExperimentConfig load_experiment_config(const std::string& path);
void save_experiment_config(const ExperimentConfig& cfg, const std::string& path);

/// Canonical JSON of the semantic config (sorted keys), and its FNV-1a hash.
std::string config_canonical_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// Named presets: ar-study, var-study, case1-20, case1-10, case2-block,
/// case3-aux. Case presets still need csv_path filled in.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Reduced-scale overrides applied on top of a preset (desk-scale runs).
struct ScaleOverrides {
    std::optional<int> length;
    std::optional<int> replicates;
    std::optional<int> trees;
    std::optional<int> impute_count;
    std::optional<int> iterations;
    std::optional<int> mtry;
    std::optional<int> donors;
    std::optional<std::vector<double>> missing_rates;
    std::optional<std::vector<int>> lead_times;
};
void apply_overrides(ExperimentConfig& cfg, const ScaleOverrides& ov);

/// Per-method verification scores for one fitted dataset.
struct MethodResult {
    std::string method;
    double rmse = 0.0;
    bool has_rmse = false;
    double crps = 0.0;
    bool has_crps = false;
    double reliability_deviation = 0.0;
    std::vector<ReliabilityPoint> reliability;
    std::vector<SharpnessPoint> sharpness;
    std::size_t scored = 0;
    std::size_t persistence_fallbacks = 0;
};

/// Everything needed to fit and score all methods once on one dataset at
/// one lead time. `masked` and `complete` are original-domain series; the
/// transform (when set) is applied internally for model fitting.
struct DatasetRun {
    std::vector<SiteSeries> masked;
    std::vector<SiteSeries> complete;  // empty when ground truth is unavailable
    EmbeddingSpec spec;
    std::optional<TransformSpec> transform;
    double train_fraction = 0.8;
    FcsConfig fcs;
    bool probabilistic = true;
    std::size_t climatology_max_samples = 10000;
    std::vector<std::string> methods{"fcs"};
    std::vector<std::string> retrain_patterns;
    std::string operational_pattern;
    int threads = 1;
};

std::vector<MethodResult> run_methods(const DatasetRun& run);

/// Monte-Carlo study over missing rates: per (rate, replicate) generate the
/// process, inject missingness, split chronologically, fit, forecast and
/// score. Writes rmse_by_rate.csv plus manifest.json; returns the manifest
/// path.
std::string run_simulation_study(const ExperimentConfig& cfg, const RunOptions& opts);

/// Case study over the configured leads/variants/methods. Writes score
/// tables, diagram data and manifest.json; returns the manifest path.
std::string run_case_study(const ExperimentConfig& cfg, const RunOptions& opts);

/// Decomposed pipeline stages operating through files, resumable.
std::string run_train(const ExperimentConfig& cfg, const RunOptions& opts);
std::string run_forecast(const std::string& model_path, const std::string& csv_path, const RunOptions& opts,
                         std::optional<double> from_fraction = std::nullopt);
std::string run_evaluate(const std::string& forecast_dir, const std::string& truth_csv, const RunOptions& opts);

/// simulate subcommand backend: emits complete.csv, mask.csv, series.csv
/// and manifest.json into the output directory.
std::string run_simulate_emit(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace uicast

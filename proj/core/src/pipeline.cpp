#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "uicast/errors.hpp"
#include "uicast/experiment.hpp"
#include "uicast/model_io.hpp"
#include "uicast/parallel.hpp"
#include "text_util.hpp"

namespace uicast {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using detail::format_double;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

json manifest_skeleton(const ExperimentConfig& cfg, const std::string& kind) {
    json j;
    j["format"] = "uicast-manifest";
    j["version"] = 1;
    j["uicast_version"] = kVersion;
    j["kind"] = kind;
    j["name"] = cfg.name;
    j["config_hash"] = config_hash(cfg);
    j["config"] = json::parse(config_canonical_json(cfg));
    return j;
}

json method_result_to_json(const MethodResult& r) {
    json j;
    j["method"] = r.method;
    j["scored"] = r.scored;
    if (r.has_rmse) j["rmse"] = r.rmse;
    if (r.has_crps) {
        j["crps"] = r.crps;
        j["reliability_deviation"] = r.reliability_deviation;
    }
    if (r.persistence_fallbacks > 0) j["persistence_fallbacks"] = r.persistence_fallbacks;
    return j;
}

std::vector<std::uint8_t> make_mask(const MissingnessConfig& mc, std::size_t length, Rng& rng) {
    if (mc.kind == "sporadic") return inject_sporadic(length, mc.rate, rng);
    if (mc.kind == "block") return inject_blocks(length, mc.block, rng);
    return std::vector<std::uint8_t>(length, 0);
}

// Missingness injection for case mode, shared by run_case_study and
// run_train so the staged pipeline sees the identical masked data. The
// target site's mask does not depend on the variant, so aux variants stay
// comparable.
std::vector<SiteSeries> mask_case_series(const std::vector<SiteSeries>& complete, const ExperimentConfig& cfg,
                                         const AuxVariant& variant, std::size_t variant_idx) {
    constexpr std::uint64_t kTargetStream = ~std::uint64_t{0};
    std::vector<SiteSeries> masked = complete;
    for (std::size_t s = 0; s < masked.size(); ++s) {
        const bool is_target = static_cast<int>(s) == cfg.target_site;
        const MissingnessConfig& mc = is_target ? cfg.missingness : variant.missingness;
        Rng rng(derive_seed(cfg.seed, {kSeedMissingness, is_target ? kTargetStream : variant_idx,
                                       static_cast<std::uint64_t>(s)}));
        apply_mask(masked[s], make_mask(mc, masked[s].size(), rng));
    }
    return masked;
}

std::string reliability_csv(const std::vector<ReliabilityPoint>& points) {
    std::ostringstream out;
    out << "level,nominal,empirical\n";
    for (const auto& p : points) {
        const int pct = static_cast<int>(std::lround(p.nominal * 100.0));
        out << 'q' << (pct < 10 ? "0" : "") << pct << ',' << format_double(p.nominal) << ','
            << format_double(p.empirical) << '\n';
    }
    return out.str();
}

std::string sharpness_csv(const std::vector<SharpnessPoint>& points) {
    std::ostringstream out;
    out << "coverage,mean_width\n";
    for (const auto& p : points)
        out << format_double(p.coverage) << ',' << format_double(p.mean_width) << '\n';
    return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Simulation study
// ---------------------------------------------------------------------------

std::string run_simulation_study(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    if (cfg.mode != "simulation") throw ConfigError("run_simulation_study needs mode 'simulation'");
    ensure_dir(opts.output_dir);

    const std::vector<double> rates = cfg.missing_rates.empty()
                                          ? std::vector<double>{cfg.missingness.kind == "sporadic"
                                                                    ? cfg.missingness.rate
                                                                    : 0.0}
                                          : cfg.missing_rates;
    const std::vector<std::string> scenarios =
        cfg.process == "var" ? cfg.var_scenarios : std::vector<std::string>{"ar"};
    const int lead = cfg.lead_times.front();

    struct Task {
        std::size_t scenario;
        std::size_t rate;
        int replicate;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        for (std::size_t r = 0; r < rates.size(); ++r)
            for (int rep = 0; rep < cfg.replicates; ++rep) tasks.push_back({s, r, rep});

    std::vector<std::vector<MethodResult>> results(tasks.size());

    parallel_for(tasks.size(), opts.threads, [&](std::size_t ti) {
        const Task& task = tasks[ti];
        const std::string& scenario = scenarios[task.scenario];
        const double rate = rates[task.rate];
        const std::uint64_t base =
            derive_seed(cfg.seed, {kSeedReplicate, static_cast<std::uint64_t>(task.scenario),
                                   static_cast<std::uint64_t>(task.rate), static_cast<std::uint64_t>(task.replicate)});

        std::vector<SiteSeries> complete;
        if (cfg.process == "ar") {
            Rng prng(derive_seed(base, {kSeedProcess}));
            complete.push_back(gen_ar(cfg.ar, prng));
        } else {
            Rng prng(derive_seed(base, {kSeedProcess}));
            auto [s1, s2] = gen_var(cfg.var, prng);
            complete.push_back(std::move(s1));
            complete.push_back(std::move(s2));
        }

        std::vector<SiteSeries> masked;
        if (scenario == "ar" || scenario == "both" || scenario == "series1_only") {
            SiteSeries s1 = complete[0];
            Rng mrng(derive_seed(base, {kSeedMissingness, 0}));
            apply_mask(s1, inject_sporadic(s1.size(), rate, mrng));
            masked.push_back(std::move(s1));
            if (scenario == "both") masked.push_back(complete[1]);
        } else {  // both_missing
            for (std::size_t s = 0; s < complete.size(); ++s) {
                SiteSeries ms = complete[s];
                Rng mrng(derive_seed(base, {kSeedMissingness, static_cast<std::uint64_t>(s)}));
                apply_mask(ms, inject_sporadic(ms.size(), rate, mrng));
                masked.push_back(std::move(ms));
            }
        }

        DatasetRun run;
        run.masked = std::move(masked);
        run.complete = scenario == "series1_only" ? std::vector<SiteSeries>{complete[0]} : complete;
        run.spec.sites = static_cast<int>(run.masked.size());
        run.spec.lags = cfg.lags;
        run.spec.lead = lead;
        run.spec.target_site = 0;
        if (cfg.transform_enabled) run.transform = cfg.transform;
        run.train_fraction = cfg.train_fraction;
        run.fcs = cfg.fcs;
        run.fcs.seed = derive_seed(base, {kSeedForest});
        run.fcs.forest.seed = derive_seed(base, {kSeedTree});
        run.probabilistic = cfg.probabilistic;
        run.climatology_max_samples = cfg.climatology_max_samples;
        run.methods = cfg.methods;
        run.retrain_patterns = cfg.retrain_patterns;
        run.operational_pattern = cfg.operational_pattern;
        run.threads = 1;  // outer loop owns the parallelism
        results[ti] = run_methods(run);
    });

    std::ostringstream csv;
    csv << "scenario,rate,replicate,method,rmse,crps,scored\n";
    json jresults = json::array();
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        const Task& task = tasks[ti];
        for (const auto& mr : results[ti]) {
            csv << scenarios[task.scenario] << ',' << format_double(rates[task.rate]) << ',' << task.replicate
                << ',' << mr.method << ',' << (mr.has_rmse ? format_double(mr.rmse) : "") << ','
                << (mr.has_crps ? format_double(mr.crps) : "") << ',' << mr.scored << '\n';
            json row = method_result_to_json(mr);
            row["scenario"] = scenarios[task.scenario];
            row["rate"] = rates[task.rate];
            row["replicate"] = task.replicate;
            jresults.push_back(std::move(row));
        }
    }
    write_text(join_path(opts.output_dir, "rmse_by_rate.csv"), csv.str());

    json manifest = manifest_skeleton(cfg, "simulation");
    manifest["results"] = std::move(jresults);
    manifest["files"] = json{{"rmse_by_rate", "rmse_by_rate.csv"}};
    const std::string path = join_path(opts.output_dir, "manifest.json");
    write_text(path, manifest.dump(2) + "\n");
    return path;
}

// ---------------------------------------------------------------------------
// Case study
// ---------------------------------------------------------------------------

std::string run_case_study(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    if (cfg.mode != "case") throw ConfigError("run_case_study needs mode 'case'");
    ensure_dir(opts.output_dir);

    const std::vector<SiteSeries> loaded = read_series_csv(cfg.csv_path);
    for (const auto& s : loaded) s.validate(cfg.transform_enabled);
    bool complete_available = true;
    for (const auto& s : loaded) complete_available = complete_available && observed_count(s) == s.size();

    std::vector<AuxVariant> variants = cfg.aux_variants;
    if (variants.empty()) {
        AuxVariant v;
        v.label = "default";
        v.use_aux = true;
        v.missingness.kind = "none";
        variants.push_back(v);
    }

    struct Cell {
        std::size_t variant;
        std::size_t lead;
    };
    std::vector<Cell> cells;
    for (std::size_t v = 0; v < variants.size(); ++v)
        for (std::size_t h = 0; h < cfg.lead_times.size(); ++h) cells.push_back({v, h});

    std::vector<std::vector<MethodResult>> results(cells.size());

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto& cell = cells[ci];
        const AuxVariant& variant = variants[cell.variant];
        const int lead = cfg.lead_times[cell.lead];

        std::vector<SiteSeries> masked_all = mask_case_series(loaded, cfg, variant, cell.variant);

        DatasetRun run;
        if (variant.use_aux) {
            run.masked = std::move(masked_all);
            if (complete_available) run.complete = loaded;
            run.spec.sites = static_cast<int>(loaded.size());
            run.spec.target_site = cfg.target_site;
        } else {
            run.masked = {masked_all[static_cast<std::size_t>(cfg.target_site)]};
            if (complete_available) run.complete = {loaded[static_cast<std::size_t>(cfg.target_site)]};
            run.spec.sites = 1;
            run.spec.target_site = 0;
        }
        run.spec.lags = cfg.lags;
        run.spec.lead = lead;
        if (cfg.transform_enabled) run.transform = cfg.transform;
        run.train_fraction = cfg.train_fraction;
        run.fcs = cfg.fcs;
        run.fcs.seed = derive_seed(cfg.seed, {kSeedForest, static_cast<std::uint64_t>(cell.variant),
                                              static_cast<std::uint64_t>(lead)});
        run.fcs.forest.seed = derive_seed(cfg.seed, {kSeedTree, static_cast<std::uint64_t>(cell.variant),
                                                     static_cast<std::uint64_t>(lead)});
        run.probabilistic = cfg.probabilistic;
        run.climatology_max_samples = cfg.climatology_max_samples;
        run.methods = cfg.methods;
        run.retrain_patterns = cfg.retrain_patterns;
        run.operational_pattern = cfg.operational_pattern;
        run.threads = opts.threads;
        results[ci] = run_methods(run);
    }

    json jresults = json::array();
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto& cell = cells[ci];
        const int lead = cfg.lead_times[cell.lead];
        const std::string& label = variants[cell.variant].label;
        for (const auto& mr : results[ci]) {
            json row = method_result_to_json(mr);
            row["variant"] = label;
            row["lead"] = lead;
            jresults.push_back(std::move(row));
            if (mr.has_crps) {
                const std::string suffix =
                    (variants.size() > 1 ? label + "_" : std::string{}) + "h" + std::to_string(lead);
                write_text(join_path(opts.output_dir, "reliability_" + suffix + "_" + mr.method + ".csv"),
                           reliability_csv(mr.reliability));
                write_text(join_path(opts.output_dir, "sharpness_" + suffix + "_" + mr.method + ".csv"),
                           sharpness_csv(mr.sharpness));
            }
        }
    }

    // Lead-by-method tables per variant (Table 1/3 layout).
    json files = json::object();
    for (std::size_t v = 0; v < variants.size(); ++v) {
        std::ostringstream rmse_csv, crps_csv;
        rmse_csv << "lead";
        crps_csv << "lead";
        for (const auto& m : cfg.methods) rmse_csv << ',' << m;
        bool any_crps = false;
        for (const auto& m : cfg.methods) {
            crps_csv << ',' << m;
        }
        rmse_csv << '\n';
        crps_csv << '\n';
        for (std::size_t h = 0; h < cfg.lead_times.size(); ++h) {
            const std::size_t ci = v * cfg.lead_times.size() + h;
            rmse_csv << cfg.lead_times[h];
            crps_csv << cfg.lead_times[h];
            for (const auto& mr : results[ci]) {
                rmse_csv << ',' << (mr.has_rmse ? format_double(mr.rmse * 100.0) : "");
                crps_csv << ',' << (mr.has_crps ? format_double(mr.crps * 100.0) : "");
                any_crps = any_crps || mr.has_crps;
            }
            rmse_csv << '\n';
            crps_csv << '\n';
        }
        const std::string tag = variants.size() > 1 ? "_" + variants[v].label : std::string{};
        write_text(join_path(opts.output_dir, "rmse_table" + tag + ".csv"), rmse_csv.str());
        files["rmse_table" + tag] = "rmse_table" + tag + ".csv";
        if (any_crps) {
            write_text(join_path(opts.output_dir, "crps_table" + tag + ".csv"), crps_csv.str());
            files["crps_table" + tag] = "crps_table" + tag + ".csv";
        }
    }

    // Grouped summary across variants (case-3 style bar data).
    if (variants.size() > 1) {
        std::ostringstream grouped;
        grouped << "variant,lead,method,rmse,crps\n";
        for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            const auto& cell = cells[ci];
            for (const auto& mr : results[ci]) {
                grouped << variants[cell.variant].label << ',' << cfg.lead_times[cell.lead] << ',' << mr.method
                        << ',' << (mr.has_rmse ? format_double(mr.rmse * 100.0) : "") << ','
                        << (mr.has_crps ? format_double(mr.crps * 100.0) : "") << '\n';
            }
        }
        write_text(join_path(opts.output_dir, "variants_summary.csv"), grouped.str());
        files["variants_summary"] = "variants_summary.csv";
    }

    json manifest = manifest_skeleton(cfg, "case");
    manifest["results"] = std::move(jresults);
    manifest["files"] = std::move(files);
    manifest["complete_ground_truth"] = complete_available;
    const std::string path = join_path(opts.output_dir, "manifest.json");
    write_text(path, manifest.dump(2) + "\n");
    return path;
}

// ---------------------------------------------------------------------------
// Decomposed pipeline stages
// ---------------------------------------------------------------------------

std::string run_train(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    if (cfg.mode != "case") throw ConfigError("train needs a case-mode config with csv_path");
    ensure_dir(opts.output_dir);

    const std::vector<SiteSeries> loaded = read_series_csv(cfg.csv_path);
    for (const auto& s : loaded) s.validate(cfg.transform_enabled);

    AuxVariant variant;
    variant.label = "default";
    variant.use_aux = true;
    variant.missingness.kind = "none";
    if (!cfg.aux_variants.empty()) variant = cfg.aux_variants.front();

    std::vector<SiteSeries> masked = mask_case_series(loaded, cfg, variant, 0);
    write_series_csv(join_path(opts.output_dir, "masked.csv"), masked);

    std::vector<SiteSeries> model_series = masked;
    std::optional<TransformSpec> tf;
    if (cfg.transform_enabled) {
        tf = cfg.transform;
        for (auto& s : model_series) transform_series(s, *tf);
    }

    const std::size_t series_len = masked.front().size();
    const auto split_pos = static_cast<std::size_t>(cfg.train_fraction * static_cast<double>(series_len));
    if (split_pos == 0 || split_pos >= series_len)
        throw DataError("train: train_fraction leaves an empty split");
    const std::int64_t split_ts = masked.front().timestamps[split_pos];

    json timing = json::object();
    json models = json::object();
    for (int lead : cfg.lead_times) {
        EmbeddingSpec spec;
        spec.sites = static_cast<int>(masked.size());
        spec.lags = cfg.lags;
        spec.lead = lead;
        spec.target_site = cfg.target_site;

        const ObservationMatrix all = build_training_matrix(model_series, spec);
        std::vector<int> train_idx;
        for (Eigen::Index r = 0; r < all.rows(); ++r)
            if (all.target_times[static_cast<std::size_t>(r)] < split_ts) train_idx.push_back(static_cast<int>(r));
        if (train_idx.empty()) throw DataError("train: empty training split");

        ObservationMatrix train;
        train.column_roles = all.column_roles;
        train.z.resize(static_cast<Eigen::Index>(train_idx.size()), all.cols());
        train.m.resize(static_cast<Eigen::Index>(train_idx.size()), all.cols());
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
            train.z.row(static_cast<Eigen::Index>(i)) = all.z.row(train_idx[i]);
            train.m.row(static_cast<Eigen::Index>(i)) = all.m.row(train_idx[i]);
        }

        FcsConfig fc = cfg.fcs;
        fc.seed = derive_seed(cfg.seed, {kSeedForest, 0, static_cast<std::uint64_t>(lead)});
        fc.forest.seed = derive_seed(cfg.seed, {kSeedTree, 0, static_cast<std::uint64_t>(lead)});

        json column_log = json::array();
        FcsHooks hooks;
        hooks.on_progress = [&](int eta, int column, double seconds) {
            column_log.push_back(json{{"iteration", eta}, {"column", column}, {"seconds", seconds}});
        };
        const auto started = std::chrono::steady_clock::now();
        FcsFitResult fit = fit_fcs_engine(train, fc, ImputePolicy::Draw, opts.threads, &hooks);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;

        fit.model.embedding = spec;
        fit.model.transform = tf;
        const std::string model_name = "model_h" + std::to_string(lead) + ".json";
        save_fcs_model(fit.model, join_path(opts.output_dir, model_name));
        models["h" + std::to_string(lead)] = model_name;
        timing["h" + std::to_string(lead)] =
            json{{"train_seconds", elapsed.count()}, {"columns", std::move(column_log)}};
    }

    json manifest = manifest_skeleton(cfg, "train");
    manifest["files"] = json{{"masked_csv", "masked.csv"}, {"models", models}};
    manifest["split"] = json{{"train_fraction", cfg.train_fraction}, {"split_timestamp", split_ts}};
    const std::string path = join_path(opts.output_dir, "train_manifest.json");
    write_text(path, manifest.dump(2) + "\n");
    // Timing lives outside the manifest so reruns stay byte-comparable.
    write_text(join_path(opts.output_dir, "timing.json"), timing.dump(2) + "\n");
    return path;
}

std::string run_forecast(const std::string& model_path, const std::string& csv_path, const RunOptions& opts,
                         std::optional<double> from_fraction) {
    const FcsModel model = load_fcs_model(model_path);
    const std::vector<SiteSeries> data = read_series_csv(csv_path);
    if (static_cast<int>(data.size()) != model.embedding.sites)
        throw ConfigError("forecast: data has " + std::to_string(data.size()) + " sites but the model embeds " +
                          std::to_string(model.embedding.sites));
    ensure_dir(opts.output_dir);

    std::vector<SiteSeries> model_series = data;
    if (model.transform)
        for (auto& s : model_series) transform_series(s, *model.transform);

    const ObservationMatrix all = build_training_matrix(model_series, model.embedding);
    const int pk = model.embedding.sites * model.embedding.lags;
    const int lead = model.embedding.lead;

    std::int64_t from_ts = std::numeric_limits<std::int64_t>::min();
    if (from_fraction) {
        if (!(*from_fraction >= 0.0 && *from_fraction < 1.0))
            throw ConfigError("forecast: from fraction must lie in [0, 1)");
        const auto pos = static_cast<std::size_t>(*from_fraction * static_cast<double>(data.front().size()));
        from_ts = data.front().timestamps[std::min(pos, data.front().size() - 1)];
    }

    std::vector<int> rows;
    for (Eigen::Index r = 0; r < all.rows(); ++r)
        if (all.target_times[static_cast<std::size_t>(r)] >= from_ts) rows.push_back(static_cast<int>(r));
    if (rows.empty()) throw DataError("forecast: no issue times in range");

    const FcsConfig& fc = model.config;
    std::vector<PredictiveDistribution> dists(rows.size());
    parallel_for(rows.size(), opts.threads, [&](std::size_t i) {
        const int r = rows[i];
        Eigen::VectorXd row(pk + 1);
        row.head(pk) = all.z.row(r).head(pk).transpose();
        row(pk) = std::numeric_limits<double>::quiet_NaN();
        MaskVector mask(static_cast<std::size_t>(pk + 1), 0);
        for (int j = 0; j < pk; ++j) mask[static_cast<std::size_t>(j)] = all.m(r, j);
        mask[static_cast<std::size_t>(pk)] = 1;
        for (int j = 0; j < pk; ++j)
            if (mask[static_cast<std::size_t>(j)]) row(j) = std::numeric_limits<double>::quiet_NaN();
        auto reps = impute_row(model, row, mask, fc.operational_iterations, fc.impute_count,
                               derive_seed(fc.seed, {kSeedOperational, static_cast<std::uint64_t>(i)}),
                               ImputePolicy::Draw);
        dists[i] = extract_target_samples(reps, model.transform, all.issue_times[static_cast<std::size_t>(r)],
                                          lead, model.embedding.target_site);
    });

    std::ostringstream csv;
    csv << "issue_time,lead,point";
    for (int q = 5; q <= 95; q += 5) csv << ",q" << (q < 10 ? "0" : "") << q;
    csv << '\n';
    json samples_rows = json::array();
    for (const auto& d : dists) {
        csv << d.issue_time << ',' << d.lead << ',' << format_double(d.mean());
        for (int q = 5; q <= 95; q += 5) csv << ',' << format_double(d.quantile(q / 100.0));
        csv << '\n';
        samples_rows.push_back(json{{"issue_time", d.issue_time}, {"samples", d.samples}});
    }
    const std::string csv_name = "forecasts_h" + std::to_string(lead) + ".csv";
    const std::string samples_name = "samples_h" + std::to_string(lead) + ".json";
    write_text(join_path(opts.output_dir, csv_name), csv.str());

    json sj;
    sj["format"] = "uicast-forecast-samples";
    sj["version"] = 1;
    sj["uicast_version"] = kVersion;
    sj["lead"] = lead;
    sj["site"] = model.embedding.target_site;
    sj["rows"] = std::move(samples_rows);
    write_text(join_path(opts.output_dir, samples_name), sj.dump() + "\n");
    return join_path(opts.output_dir, csv_name);
}

std::string run_evaluate(const std::string& forecast_dir, const std::string& truth_csv, const RunOptions& opts) {
    const std::vector<SiteSeries> truth = read_series_csv(truth_csv);
    ensure_dir(opts.output_dir);

    std::vector<fs::path> sample_files;
    for (const auto& entry : fs::directory_iterator(forecast_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("samples_h", 0) == 0 && entry.path().extension() == ".json")
            sample_files.push_back(entry.path());
    }
    std::sort(sample_files.begin(), sample_files.end());
    if (sample_files.empty()) throw DataError("evaluate: no samples_h*.json files in " + forecast_dir);

    json summary;
    summary["format"] = "uicast-evaluation";
    summary["version"] = 1;
    summary["uicast_version"] = kVersion;
    json rmse_j = json::object(), crps_j = json::object(), rel_j = json::object(), scored_j = json::object();

    for (const auto& file : sample_files) {
        std::ifstream in(file);
        json sj;
        try {
            in >> sj;
        } catch (const json::exception& e) {
            throw DataError("evaluate: " + file.string() + " is not valid JSON: " + e.what());
        }
        const int lead = sj.at("lead").get<int>();
        const int site = sj.at("site").get<int>();
        if (site < 0 || site >= static_cast<int>(truth.size()))
            throw DataError("evaluate: forecast site out of range of the truth CSV");
        const auto& ts = truth[static_cast<std::size_t>(site)];
        const std::int64_t step = ts.timestamps.size() > 1 ? ts.timestamps[1] - ts.timestamps[0] : 1;

        if (sj.at("rows").empty()) throw DataError("evaluate: " + file.string() + " contains no forecasts");

        PointVerification pv;
        ProbVerification bv;
        for (const auto& rowj : sj.at("rows")) {
            const auto issue = rowj.at("issue_time").get<std::int64_t>();
            const std::int64_t target_time = issue + static_cast<std::int64_t>(lead) * step;
            const std::int64_t offset = (target_time - ts.timestamps.front()) / step;
            if (offset < 0 || offset >= static_cast<std::int64_t>(ts.size())) continue;
            const auto idx = static_cast<std::size_t>(offset);
            if (ts.missing[idx]) continue;
            PredictiveDistribution d;
            d.samples = rowj.at("samples").get<std::vector<double>>();
            std::sort(d.samples.begin(), d.samples.end());
            d.issue_time = issue;
            d.lead = lead;
            pv.forecast.push_back(d.mean());
            pv.observed.push_back(ts.values[idx]);
            bv.forecast.push_back(std::move(d));
            bv.observed.push_back(ts.values[idx]);
        }
        if (pv.forecast.empty())
            throw DataError("evaluate: no scorable forecast/observation pairs for lead " + std::to_string(lead));

        const std::string key = "h" + std::to_string(lead);
        rmse_j[key] = rmse(pv);
        crps_j[key] = mean_crps(bv);
        scored_j[key] = pv.forecast.size();
        const auto rel = reliability_diagram(bv, default_reliability_levels());
        rel_j[key] = rel.deviation_percent;
        write_text(join_path(opts.output_dir, "reliability_" + key + ".csv"), reliability_csv(rel.points));
        write_text(join_path(opts.output_dir, "sharpness_" + key + ".csv"),
                   sharpness_csv(sharpness(bv, default_sharpness_coverages())));
    }

    summary["rmse"] = std::move(rmse_j);
    summary["crps"] = std::move(crps_j);
    summary["reliability_deviation"] = std::move(rel_j);
    summary["scored"] = std::move(scored_j);
    const std::string path = join_path(opts.output_dir, "summary.json");
    write_text(path, summary.dump(2) + "\n");
    return path;
}

// ---------------------------------------------------------------------------
// simulate subcommand
// ---------------------------------------------------------------------------

std::string run_simulate_emit(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    if (cfg.mode != "simulation") throw ConfigError("simulate needs mode 'simulation'");
    ensure_dir(opts.output_dir);

    std::vector<SiteSeries> complete;
    Rng prng(derive_seed(cfg.seed, {kSeedProcess}));
    if (cfg.process == "ar") {
        complete.push_back(gen_ar(cfg.ar, prng));
    } else {
        auto [s1, s2] = gen_var(cfg.var, prng);
        complete.push_back(std::move(s1));
        complete.push_back(std::move(s2));
    }

    std::vector<SiteSeries> masked = complete;
    std::vector<std::vector<std::uint8_t>> masks;
    for (std::size_t s = 0; s < masked.size(); ++s) {
        Rng mrng(derive_seed(cfg.seed, {kSeedMissingness, static_cast<std::uint64_t>(s)}));
        masks.push_back(make_mask(cfg.missingness, masked[s].size(), mrng));
        apply_mask(masked[s], masks.back());
    }

    write_series_csv(join_path(opts.output_dir, "complete.csv"), complete);
    write_series_csv(join_path(opts.output_dir, "series.csv"), masked);

    std::ostringstream mask_csv;
    mask_csv << "timestamp";
    for (const auto& s : complete) mask_csv << ',' << s.site_id;
    mask_csv << '\n';
    for (std::size_t i = 0; i < complete.front().size(); ++i) {
        mask_csv << complete.front().timestamps[i];
        for (const auto& m : masks) mask_csv << ',' << static_cast<int>(m[i]);
        mask_csv << '\n';
    }
    write_text(join_path(opts.output_dir, "mask.csv"), mask_csv.str());

    json manifest = manifest_skeleton(cfg, "simulate");
    manifest["files"] = json{{"complete", "complete.csv"}, {"series", "series.csv"}, {"mask", "mask.csv"}};
    const std::string path = join_path(opts.output_dir, "manifest.json");
    write_text(path, manifest.dump(2) + "\n");
    return path;
}

}  // namespace uicast

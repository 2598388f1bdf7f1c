#include "uicast/fcs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "uicast/errors.hpp"
#include "uicast/parallel.hpp"

namespace uicast {

void FcsConfig::validate(int columns) const {
    if (iterations < 1) throw ConfigError("fcs: iterations must be >= 1");
    if (operational_iterations < 1) throw ConfigError("fcs: operational_iterations must be >= 1");
    if (impute_count < 1) throw ConfigError("fcs: impute_count must be >= 1");
    if (donors < 1) throw ConfigError("fcs: donors must be >= 1");
    if (!column_order.empty()) {
        if (static_cast<int>(column_order.size()) != columns)
            throw ConfigError("fcs: column_order length does not match column count");
        std::vector<bool> seen(static_cast<std::size_t>(columns), false);
        for (int j : column_order) {
            if (j < 0 || j >= columns || seen[static_cast<std::size_t>(j)])
                throw ConfigError("fcs: column_order is not a permutation of 0.." + std::to_string(columns - 1));
            seen[static_cast<std::size_t>(j)] = true;
        }
    }
}

std::vector<int> FcsConfig::resolved_order(int columns) const {
    if (!column_order.empty()) return column_order;
    std::vector<int> order(static_cast<std::size_t>(columns));
    std::iota(order.begin(), order.end(), 0);
    return order;
}

namespace {

void gather_except(const Eigen::MatrixXd& m, Eigen::Index row, int skip_col, std::vector<double>& out) {
    const int cols = static_cast<int>(m.cols());
    out.resize(static_cast<std::size_t>(cols - 1));
    int w = 0;
    for (int c = 0; c < cols; ++c) {
        if (c == skip_col) continue;
        out[static_cast<std::size_t>(w++)] = m(row, c);
    }
}

void gather_except_vec(const Eigen::VectorXd& v, int skip_col, std::vector<double>& out) {
    const int n = static_cast<int>(v.size());
    out.resize(static_cast<std::size_t>(n - 1));
    int w = 0;
    for (int c = 0; c < n; ++c) {
        if (c == skip_col) continue;
        out[static_cast<std::size_t>(w++)] = v(c);
    }
}

std::vector<double> observed_column_means(const ObservationMatrix& data) {
    const int cols = static_cast<int>(data.cols());
    std::vector<double> means(static_cast<std::size_t>(cols), 0.0);
    for (int j = 0; j < cols; ++j) {
        double sum = 0.0;
        std::size_t n = 0;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            if (data.m(i, j) == 0) {
                sum += data.z(i, j);
                ++n;
            }
        }
        means[static_cast<std::size_t>(j)] = n ? sum / static_cast<double>(n) : 0.0;
    }
    return means;
}

}  // namespace

FcsFitResult fit_fcs_engine(const ObservationMatrix& data, const FcsConfig& cfg, ImputePolicy policy, int threads,
                            const FcsHooks* hooks) {
    const int cols = static_cast<int>(data.cols());
    const Eigen::Index rows = data.rows();
    if (rows == 0) throw DataError("fcs: training matrix is empty");
    cfg.validate(cols);

    std::vector<std::vector<int>> observed(static_cast<std::size_t>(cols));
    std::vector<std::vector<int>> missing(static_cast<std::size_t>(cols));
    for (int j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (data.m(i, j) == 0)
                observed[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
            else
                missing[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
        }
        if (observed[static_cast<std::size_t>(j)].size() < static_cast<std::size_t>(cfg.donors))
            throw ConfigError("fcs: column " + std::to_string(j) + " has only " +
                              std::to_string(observed[static_cast<std::size_t>(j)].size()) +
                              " observed entries, fewer than the donor pool size " + std::to_string(cfg.donors));
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        bool all_missing = true;
        for (int j = 0; j < cols && all_missing; ++j) all_missing = data.m(i, j) != 0;
        if (all_missing)
            throw DataError("fcs: row " + std::to_string(i) + " is entirely missing; drop such rows first");
    }

    FcsFitResult result;
    result.model.config = cfg;
    result.model.column_means = observed_column_means(data);
    result.model.columns.resize(static_cast<std::size_t>(cols));

    Eigen::MatrixXd zc = data.z;
    std::size_t total_missing = 0;
    for (int j = 0; j < cols; ++j) {
        const double init = cfg.column_mean_init ? result.model.column_means[static_cast<std::size_t>(j)] : 0.0;
        for (int i : missing[static_cast<std::size_t>(j)]) zc(i, j) = init;
        total_missing += missing[static_cast<std::size_t>(j)].size();
    }

    const auto order = cfg.resolved_order(cols);

    // With nothing to impute, every sweep refits the same matrix, so one
    // pass with the final iteration's seed schedule gives the same model.
    const int first_iteration = total_missing == 0 ? cfg.iterations : 1;

    std::vector<double> features;
    for (int eta = first_iteration; eta <= cfg.iterations; ++eta) {
        for (int j : order) {
            const auto started = std::chrono::steady_clock::now();
            ForestConfig fc = cfg.forest;
            fc.seed = derive_seed(cfg.seed, {kSeedForest, static_cast<std::uint64_t>(eta),
                                             static_cast<std::uint64_t>(j)});
            PmmColumnModel column_model =
                fit_pmm_column(zc, observed[static_cast<std::size_t>(j)], j, cfg.donors, fc, threads);

            Rng draw_rng(derive_seed(cfg.seed, {kSeedTrainDraw, static_cast<std::uint64_t>(eta),
                                                static_cast<std::uint64_t>(j)}));
            for (int i : missing[static_cast<std::size_t>(j)]) {
                gather_except(zc, i, j, features);
                zc(i, j) = policy == ImputePolicy::Draw ? impute_pmm(column_model, features.data(), draw_rng)
                                                        : pmm_point(column_model, features.data());
            }
            if (eta == cfg.iterations) result.model.columns[static_cast<std::size_t>(j)] = std::move(column_model);

            if (hooks) {
                if (hooks->on_column_update) hooks->on_column_update(eta, j, zc);
                if (hooks->on_progress) {
                    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
                    hooks->on_progress(eta, j, elapsed.count());
                }
            }
        }
    }

    result.completed = std::move(zc);
    return result;
}

FcsModel fit_fcs(const ObservationMatrix& data, const FcsConfig& cfg, int threads) {
    return fit_fcs_engine(data, cfg, ImputePolicy::Draw, threads).model;
}

Eigen::VectorXd impute_row_replicate(const FcsModel& model, const Eigen::VectorXd& row, const MaskVector& mask,
                                     int iterations, std::uint64_t replicate_seed, ImputePolicy policy) {
    const int cols = model.cols();
    if (static_cast<int>(row.size()) != cols || static_cast<int>(mask.size()) != cols)
        throw DataError("impute_row: row/mask length does not match the model's column count");
    if (iterations < 1) throw ConfigError("impute_row: iterations must be >= 1");

    int missing_count = 0;
    for (auto m : mask) missing_count += m != 0;
    if (missing_count == cols) throw DataError("impute_row: every cell is missing; nothing to condition on");

    Eigen::VectorXd z = row;
    for (int j = 0; j < cols; ++j) {
        if (mask[static_cast<std::size_t>(j)])
            z(j) = model.config.column_mean_init ? model.column_means[static_cast<std::size_t>(j)] : 0.0;
    }
    if (missing_count == 0) return z;

    // A single missing cell is conditioned on fixed values, so every sweep
    // redraws from the same pool; only the final draw survives and its
    // distribution equals a single draw.
    const int sweeps = missing_count == 1 ? 1 : iterations;

    Rng rng(replicate_seed);
    std::vector<double> features;
    const auto order = model.config.resolved_order(cols);
    for (int it = 0; it < sweeps; ++it) {
        for (int j : order) {
            if (!mask[static_cast<std::size_t>(j)]) continue;
            gather_except_vec(z, j, features);
            const auto& cm = model.columns[static_cast<std::size_t>(j)];
            z(j) = policy == ImputePolicy::Draw ? impute_pmm(cm, features.data(), rng)
                                                : pmm_point(cm, features.data());
        }
    }
    return z;
}

std::vector<Eigen::VectorXd> impute_row(const FcsModel& model, const Eigen::VectorXd& row, const MaskVector& mask,
                                        int iterations, int replicate_count, std::uint64_t seed,
                                        ImputePolicy policy) {
    if (replicate_count < 1) throw ConfigError("impute_row: replicate count must be >= 1");
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(replicate_count));
    for (int l = 0; l < replicate_count; ++l) {
        out.push_back(impute_row_replicate(model, row, mask, iterations,
                                           derive_seed(seed, {kSeedReplicate, static_cast<std::uint64_t>(l)}),
                                           policy));
    }
    return out;
}

std::vector<std::vector<Eigen::VectorXd>> impute_rows(const FcsModel& model,
                                                      const std::vector<Eigen::VectorXd>& rows,
                                                      const std::vector<MaskVector>& masks, int iterations,
                                                      int replicate_count, std::uint64_t seed, ImputePolicy policy,
                                                      int threads) {
    if (rows.size() != masks.size()) throw DataError("impute_rows: rows and masks differ in length");
    std::vector<std::vector<Eigen::VectorXd>> out(rows.size());
    parallel_for(rows.size(), threads, [&](std::size_t r) {
        out[r] = impute_row(model, rows[r], masks[r], iterations, replicate_count,
                            derive_seed(seed, {kSeedOperational, static_cast<std::uint64_t>(r)}), policy);
    });
    return out;
}

}  // namespace uicast

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "uicast/embedding.hpp"
#include "uicast/pmm.hpp"
#include "uicast/transform.hpp"

namespace uicast {

struct FcsConfig {
    int iterations = 10;              // training sweeps over the columns
    int operational_iterations = 10;  // sweeps when imputing a new row
    int impute_count = 99;            // L, replicates per forecast
    int donors = 5;                   // PMM pool size d
    std::vector<int> column_order;    // empty = natural order 0..pk
    ForestConfig forest;
    bool column_mean_init = false;    // initialize at column means instead of 0
    std::uint64_t seed = 0;

    void validate(int columns) const;
    std::vector<int> resolved_order(int columns) const;
};

/// How a missing cell is filled from its column model: a PMM donor draw, or
/// the deterministic conditional mean (the regression-imputation policy).
enum class ImputePolicy { Draw, Mean };

/// The fitted joint model: one PMM column model per matrix column plus the
/// configuration that grew it. column_means are the observed training means
/// (used by the column-mean initialization and by mean-imputing baselines).
struct FcsModel {
    std::vector<PmmColumnModel> columns;
    FcsConfig config;
    EmbeddingSpec embedding;
    std::optional<TransformSpec> transform;
    std::vector<double> column_means;

    int cols() const { return static_cast<int>(columns.size()); }
};

/// Test/instrumentation hooks. on_column_update fires after each column's
/// refit-and-impute step with the current matrix state; on_progress reports
/// elapsed seconds per (iteration, column).
struct FcsHooks {
    std::function<void(int iteration, int column, const Eigen::MatrixXd& state)> on_column_update;
    std::function<void(int iteration, int column, double seconds)> on_progress;
};

struct FcsFitResult {
    FcsModel model;
    Eigen::MatrixXd completed;  // training matrix with final imputations filled in
};

/// Iterative column-by-column estimation: missing cells start at the
/// initialization value, then each sweep refits every column model on the
/// rows where that column is observed and re-imputes its missing cells, so
/// a column's update sees current-sweep values for columns already visited
/// and previous-sweep values for the rest. Observed cells never change.
FcsFitResult fit_fcs_engine(const ObservationMatrix& data, const FcsConfig& cfg, ImputePolicy policy,
                            int threads = 1, const FcsHooks* hooks = nullptr);

FcsModel fit_fcs(const ObservationMatrix& data, const FcsConfig& cfg, int threads = 1);

/// One imputation chain for one row under a fixed model: initialize missing
/// cells, sweep the column order `iterations` times, return the completed
/// row. Observed cells are returned unchanged.
Eigen::VectorXd impute_row_replicate(const FcsModel& model, const Eigen::VectorXd& row, const MaskVector& mask,
                                     int iterations, std::uint64_t replicate_seed,
                                     ImputePolicy policy = ImputePolicy::Draw);

/// L independent chains for one row; replicate l uses a stream derived from
/// (seed, l), so permuting replicate indices permutes the outputs.
std::vector<Eigen::VectorXd> impute_row(const FcsModel& model, const Eigen::VectorXd& row, const MaskVector& mask,
                                        int iterations, int replicate_count, std::uint64_t seed,
                                        ImputePolicy policy = ImputePolicy::Draw);

/// Batch form over multiple rows; row r derives its seed from (seed, r).
std::vector<std::vector<Eigen::VectorXd>> impute_rows(const FcsModel& model,
                                                      const std::vector<Eigen::VectorXd>& rows,
                                                      const std::vector<MaskVector>& masks, int iterations,
                                                      int replicate_count, std::uint64_t seed,
                                                      ImputePolicy policy = ImputePolicy::Draw, int threads = 1);

}  // namespace uicast

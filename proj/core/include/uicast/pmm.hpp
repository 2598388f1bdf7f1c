#pragma once

#include <Eigen/Dense>
#include <vector>

#include "uicast/rf.hpp"
#include "uicast/rng.hpp"

namespace uicast {

/// Predictive-mean-matching conditional model for one matrix column:
/// a regression of that column on all the others, the stored candidate
/// predictions for every training row, and the observed donor values that
/// imputation samples from.
struct PmmColumnModel {
    int column = -1;
    int donors = 5;  // pool size d
    RandomForestModel forest;

    std::vector<double> train_candidates;  // prediction for every training row

    // Observed entries only, ascending row order.
    std::vector<int> donor_rows;
    std::vector<double> donor_values;      // the observed z values imputations return
    std::vector<double> donor_candidates;  // predictions at the donor rows

    // donor index order sorted by (candidate, row); built lazily for the
    // binary-search pool path on large columns.
    std::vector<int> sorted_order;

    int feature_count() const { return forest.feature_count; }
};

/// Fits the column model on the completed matrix: the forest is trained on
/// the rows where column j is observed (features = all other columns),
/// then candidate predictions are stored for every row.
PmmColumnModel fit_pmm_column(const Eigen::MatrixXd& completed, const std::vector<int>& observed_rows,
                              int column, int donors, const ForestConfig& forest_cfg, int threads = 1);

/// The d observed rows whose candidate predictions are nearest to
/// `candidate` by |difference|; boundary ties resolve toward the lowest row
/// index. Returned as indices into the donor arrays, sorted by (distance,
/// row index).
std::vector<int> pmm_donor_pool(const PmmColumnModel& model, double candidate);

/// Conditional-mean value for a completed feature vector (the candidate
/// prediction itself). Used by the deterministic imputation policy.
double pmm_point(const PmmColumnModel& model, const double* features);

/// One PMM draw: predict the candidate, select the donor pool, return a
/// uniformly sampled donor's observed value.
double impute_pmm(const PmmColumnModel& model, const double* features, Rng& rng);

}  // namespace uicast

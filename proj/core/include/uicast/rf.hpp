#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "uicast/rng.hpp"

namespace uicast {

struct ForestConfig {
    int trees = 100;          // B
    int min_node_size = 5;    // smallest admissible child node
    int mtry = 0;             // candidate split variables per node; 0 = max(1, d/3)
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate(int feature_count) const;
    int resolved_mtry(int feature_count) const;
};

/// Flat tree storage. split_var < 0 marks a leaf holding `value`, the mean
/// of the training targets routed to it. Internal nodes route x[split_var]
/// <= split_point to `left`, otherwise to `right`.
struct TreeNode {
    int split_var = -1;
    double split_point = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    int feature_count = 0;
};

/// Grows one CART regression tree by greedy variance reduction. Candidate
/// split points are midpoints between consecutive distinct sorted values of
/// each candidate feature; ties break toward the lowest variable index, then
/// the smallest split point. Splitting stops when no candidate leaves both
/// children with at least min_node_size rows, or the node target is constant.
RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg, Rng& rng);

double predict_tree(const RegressionTree& tree, const double* x, int d);
double predict_tree(const RegressionTree& tree, const Eigen::VectorXd& x);

struct RandomForestModel {
    std::vector<RegressionTree> trees;
    ForestConfig config;
    int feature_count = 0;

    double predict(const double* x, int d) const;
    double predict(const Eigen::VectorXd& x) const;
};

/// Bagged ensemble: tree b is grown with its own stream derived from
/// (seed, b) on a with-replacement resample of the rows, so serial and
/// parallel builds are bit-identical.
RandomForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg,
                             int threads = 1);

double predict_forest(const RandomForestModel& model, const Eigen::VectorXd& x);

}  // namespace uicast

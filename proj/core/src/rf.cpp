#include "uicast/rf.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>
#include <utility>

#include "uicast/errors.hpp"
#include "uicast/parallel.hpp"

namespace uicast {

void ForestConfig::validate(int feature_count) const {
    if (trees < 1) throw ConfigError("forest: trees must be >= 1");
    if (min_node_size < 1) throw ConfigError("forest: min_node_size must be >= 1");
    if (mtry < 0 || mtry > feature_count)
        throw ConfigError("forest: mtry must lie in [1, " + std::to_string(feature_count) + "] (0 = auto)");
}

int ForestConfig::resolved_mtry(int feature_count) const {
    if (mtry == 0) return std::max(1, feature_count / 3);
    return mtry;
}

namespace {

struct Builder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    int min_node;
    int mtry;
    Rng& rng;

    std::vector<int> rows;                           // node row ids, partitioned in place
    std::vector<std::pair<double, double>> scratch;  // (feature value, target)
    std::vector<double> ybuf;
    std::vector<int> feats;
    std::vector<TreeNode> nodes;

    int build(int begin, int end) {
        const int n = end - begin;
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();

        if (n >= 2 * min_node && !pure(begin, end)) {
            int best_var = -1, best_left = 0;
            double best_split = 0.0, best_score = -1.0;
            select_features();
            for (int a : feats) search_split(begin, end, a, best_var, best_split, best_score, best_left);
            if (best_var >= 0) {
                const int a = best_var;
                const double s = best_split;
                const auto mid = std::partition(rows.begin() + begin, rows.begin() + end,
                                                [&](int r) { return X(r, a) <= s; });
                const int split_at = static_cast<int>(mid - rows.begin());
                assert(split_at - begin == best_left);
                nodes[id].split_var = a;
                nodes[id].split_point = s;
                const int l = build(begin, split_at);
                const int r = build(split_at, end);
                nodes[id].left = l;
                nodes[id].right = r;
                return id;
            }
        }
        nodes[id].value = sorted_mean(begin, end);
        return id;
    }

    bool pure(int begin, int end) const {
        const double first = y(rows[static_cast<std::size_t>(begin)]);
        for (int i = begin + 1; i < end; ++i)
            if (y(rows[static_cast<std::size_t>(i)]) != first) return false;
        return true;
    }

    // Permutation-invariant leaf value: accumulate targets in sorted order.
    double sorted_mean(int begin, int end) {
        ybuf.clear();
        for (int i = begin; i < end; ++i) ybuf.push_back(y(rows[static_cast<std::size_t>(i)]));
        std::sort(ybuf.begin(), ybuf.end());
        double sum = 0.0;
        for (double v : ybuf) sum += v;
        return sum / static_cast<double>(ybuf.size());
    }

    void select_features() {
        const int d = static_cast<int>(X.cols());
        feats.resize(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) feats[static_cast<std::size_t>(i)] = i;
        if (mtry < d) {
            for (int i = 0; i < mtry; ++i) {
                const auto j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d - i)));
                std::swap(feats[static_cast<std::size_t>(i)], feats[static_cast<std::size_t>(j)]);
            }
            feats.resize(static_cast<std::size_t>(mtry));
            // Ascending evaluation order keeps the variable-index tie-break.
            std::sort(feats.begin(), feats.end());
        }
    }

    // Scans all admissible midpoints of feature a, maximizing
    // sumL^2/nL + sumR^2/nR (equivalent to minimizing child SSE).
    void search_split(int begin, int end, int a, int& best_var, double& best_split, double& best_score,
                      int& best_left) {
        const int n = end - begin;
        scratch.clear();
        for (int i = begin; i < end; ++i) {
            const int r = rows[static_cast<std::size_t>(i)];
            scratch.emplace_back(X(r, a), y(r));
        }
        // Sorting by (value, target) pins the accumulation order, so the fit
        // does not depend on the ordering of the training rows.
        std::sort(scratch.begin(), scratch.end());
        if (scratch.front().first == scratch.back().first) return;  // constant feature

        const double total = [&] {
            double t = 0.0;
            for (const auto& p : scratch) t += p.second;
            return t;
        }();

        double left_sum = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            left_sum += scratch[static_cast<std::size_t>(i)].second;
            const int nl = i + 1, nr = n - nl;
            if (nl < min_node || nr < min_node) continue;
            const double xl = scratch[static_cast<std::size_t>(i)].first;
            const double xr = scratch[static_cast<std::size_t>(i + 1)].first;
            if (xl == xr) continue;
            const double right_sum = total - left_sum;
            const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if (score > best_score) {
                double split = xl + (xr - xl) / 2.0;
                // Adjacent doubles can round the midpoint onto xr, which
                // would route the whole node left; fall back to xl.
                if (!(split < xr)) split = xl;
                best_score = score;
                best_var = a;
                best_split = split;
                best_left = nl;
            }
        }
    }
};

}  // namespace

RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg, Rng& rng) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    if (n == 0 || d == 0) throw std::invalid_argument("fit_tree: empty training data");
    if (y.size() != n) throw std::invalid_argument("fit_tree: X rows and y length differ");
    cfg.validate(d);

    Builder b{X, y, cfg.min_node_size, cfg.resolved_mtry(d), rng, {}, {}, {}, {}, {}};
    b.rows.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) b.rows[static_cast<std::size_t>(i)] = i;
    b.scratch.reserve(static_cast<std::size_t>(n));
    b.build(0, n);

    RegressionTree tree;
    tree.nodes = std::move(b.nodes);
    tree.feature_count = d;
    return tree;
}

namespace {

RegressionTree fit_tree_bootstrap(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg,
                                  Rng& rng) {
    const int n = static_cast<int>(X.rows());
    if (!cfg.bootstrap) return fit_tree(X, y, cfg, rng);

    Eigen::MatrixXd Xb(n, X.cols());
    Eigen::VectorXd yb(n);
    for (int i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        Xb.row(i) = X.row(r);
        yb(i) = y(r);
    }
    return fit_tree(Xb, yb, cfg, rng);
}

}  // namespace

namespace {

double walk(const RegressionTree& tree, const double* x) {
    int id = 0;
    for (;;) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        if (node.split_var < 0) return node.value;
        id = x[node.split_var] <= node.split_point ? node.left : node.right;
    }
}

}  // namespace

double predict_tree(const RegressionTree& tree, const double* x, int d) {
    if (d != tree.feature_count)
        throw std::invalid_argument("predict_tree: got " + std::to_string(d) + " features, tree has " +
                                    std::to_string(tree.feature_count));
    return walk(tree, x);
}

double predict_tree(const RegressionTree& tree, const Eigen::VectorXd& x) {
    return predict_tree(tree, x.data(), static_cast<int>(x.size()));
}

double RandomForestModel::predict(const double* x, int d) const {
    if (d != feature_count)
        throw std::invalid_argument("forest predict: got " + std::to_string(d) + " features, model has " +
                                    std::to_string(feature_count));
    double sum = 0.0;
    for (const auto& t : trees) sum += walk(t, x);
    return sum / static_cast<double>(trees.size());
}

double RandomForestModel::predict(const Eigen::VectorXd& x) const {
    return predict(x.data(), static_cast<int>(x.size()));
}

RandomForestModel fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg,
                             int threads) {
    const int d = static_cast<int>(X.cols());
    if (X.rows() == 0 || d == 0) throw std::invalid_argument("fit_forest: empty training data");
    if (y.size() != X.rows()) throw std::invalid_argument("fit_forest: X rows and y length differ");
    cfg.validate(d);

    RandomForestModel model;
    model.config = cfg;
    model.feature_count = d;
    model.trees.resize(static_cast<std::size_t>(cfg.trees));
    parallel_for(static_cast<std::size_t>(cfg.trees), threads, [&](std::size_t b) {
        Rng rng(derive_seed(cfg.seed, {kSeedTree, static_cast<std::uint64_t>(b)}));
        model.trees[b] = fit_tree_bootstrap(X, y, cfg, rng);
    });
    return model;
}

double predict_forest(const RandomForestModel& model, const Eigen::VectorXd& x) {
    return model.predict(x);
}

}  // namespace uicast

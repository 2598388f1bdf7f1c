#include "uicast/pmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "uicast/errors.hpp"
#include "uicast/parallel.hpp"

namespace uicast {

namespace {

// Linear scans are faster until the donor column gets large.
constexpr std::size_t kSortedSearchThreshold = 10000;

void gather_features(const Eigen::MatrixXd& m, int row, int skip_col, double* out) {
    const int cols = static_cast<int>(m.cols());
    int w = 0;
    for (int c = 0; c < cols; ++c) {
        if (c == skip_col) continue;
        out[w++] = m(row, c);
    }
}

struct PoolEntry {
    double dist;
    int idx;  // index into the donor arrays
    bool operator<(const PoolEntry& other) const {
        return dist != other.dist ? dist < other.dist : idx < other.idx;
    }
};

std::vector<int> pool_linear(const PmmColumnModel& m, double candidate) {
    const int d = m.donors;
    std::vector<PoolEntry> best;
    best.reserve(static_cast<std::size_t>(d) + 1);
    for (std::size_t i = 0; i < m.donor_candidates.size(); ++i) {
        const PoolEntry e{std::abs(candidate - m.donor_candidates[i]), static_cast<int>(i)};
        if (best.size() == static_cast<std::size_t>(d) && !(e < best.back())) continue;
        best.insert(std::upper_bound(best.begin(), best.end(), e), e);
        if (best.size() > static_cast<std::size_t>(d)) best.pop_back();
    }
    std::vector<int> out;
    out.reserve(best.size());
    for (const auto& e : best) out.push_back(e.idx);
    return out;
}

std::vector<int> pool_sorted(const PmmColumnModel& m, double candidate) {
    const auto& order = m.sorted_order;
    const std::size_t n = order.size();
    const std::size_t d = static_cast<std::size_t>(m.donors);

    auto value_at = [&](std::size_t pos) { return m.donor_candidates[static_cast<std::size_t>(order[pos])]; };
    std::size_t hi = static_cast<std::size_t>(
        std::lower_bound(order.begin(), order.end(), candidate,
                         [&](int idx, double v) { return m.donor_candidates[static_cast<std::size_t>(idx)] < v; }) -
        order.begin());
    std::size_t lo = hi;  // window is [lo, hi)

    std::vector<PoolEntry> collected;
    collected.reserve(d + 8);
    auto dist_at = [&](std::size_t pos) { return std::abs(candidate - value_at(pos)); };

    // Expand outward taking the nearer side, which yields nondecreasing
    // distances; afterwards absorb boundary ties so the (distance, row)
    // ordering matches an exhaustive scan exactly.
    while (collected.size() < d && (lo > 0 || hi < n)) {
        if (lo > 0 && (hi >= n || dist_at(lo - 1) <= dist_at(hi))) {
            --lo;
            collected.push_back({dist_at(lo), order[lo]});
        } else {
            collected.push_back({dist_at(hi), order[hi]});
            ++hi;
        }
    }
    if (!collected.empty()) {
        const double boundary = collected.back().dist;
        while (lo > 0 && dist_at(lo - 1) == boundary) {
            --lo;
            collected.push_back({boundary, order[lo]});
        }
        while (hi < n && dist_at(hi) == boundary) {
            collected.push_back({boundary, order[hi]});
            ++hi;
        }
    }
    std::sort(collected.begin(), collected.end());
    if (collected.size() > d) collected.resize(d);

    std::vector<int> out;
    out.reserve(collected.size());
    for (const auto& e : collected) out.push_back(e.idx);
    return out;
}

}  // namespace

PmmColumnModel fit_pmm_column(const Eigen::MatrixXd& completed, const std::vector<int>& observed_rows,
                              int column, int donors, const ForestConfig& forest_cfg, int threads) {
    const int rows = static_cast<int>(completed.rows());
    const int cols = static_cast<int>(completed.cols());
    if (column < 0 || column >= cols) throw ConfigError("pmm: column out of range");
    if (donors < 1) throw ConfigError("pmm: donor pool size must be >= 1");
    if (observed_rows.size() < static_cast<std::size_t>(donors))
        throw ConfigError("pmm: column " + std::to_string(column) + " has " +
                          std::to_string(observed_rows.size()) + " observed rows, fewer than the donor pool size " +
                          std::to_string(donors));
    if (!completed.allFinite())
        throw std::invalid_argument("pmm: completed matrix contains non-finite entries");

    const int d_feat = cols - 1;
    const int n_obs = static_cast<int>(observed_rows.size());

    Eigen::MatrixXd X(n_obs, d_feat);
    Eigen::VectorXd y(n_obs);
    {
        std::vector<double> buf(static_cast<std::size_t>(d_feat));
        for (int i = 0; i < n_obs; ++i) {
            const int r = observed_rows[static_cast<std::size_t>(i)];
            gather_features(completed, r, column, buf.data());
            for (int c = 0; c < d_feat; ++c) X(i, c) = buf[static_cast<std::size_t>(c)];
            y(i) = completed(r, column);
        }
    }

    PmmColumnModel model;
    model.column = column;
    model.donors = donors;
    model.forest = fit_forest(X, y, forest_cfg, threads);

    model.train_candidates.resize(static_cast<std::size_t>(rows));
    {
        std::vector<double> buf(static_cast<std::size_t>(d_feat));
        for (int r = 0; r < rows; ++r) {
            gather_features(completed, r, column, buf.data());
            model.train_candidates[static_cast<std::size_t>(r)] = model.forest.predict(buf.data(), d_feat);
        }
    }

    model.donor_rows.assign(observed_rows.begin(), observed_rows.end());
    model.donor_values.resize(observed_rows.size());
    model.donor_candidates.resize(observed_rows.size());
    for (std::size_t i = 0; i < observed_rows.size(); ++i) {
        const int r = observed_rows[i];
        model.donor_values[i] = completed(r, column);
        model.donor_candidates[i] = model.train_candidates[static_cast<std::size_t>(r)];
    }

    if (model.donor_candidates.size() > kSortedSearchThreshold) {
        model.sorted_order.resize(model.donor_candidates.size());
        for (std::size_t i = 0; i < model.sorted_order.size(); ++i)
            model.sorted_order[i] = static_cast<int>(i);
        std::sort(model.sorted_order.begin(), model.sorted_order.end(), [&](int a, int b) {
            const double ca = model.donor_candidates[static_cast<std::size_t>(a)];
            const double cb = model.donor_candidates[static_cast<std::size_t>(b)];
            return ca != cb ? ca < cb : a < b;
        });
    }
    return model;
}

std::vector<int> pmm_donor_pool(const PmmColumnModel& model, double candidate) {
    if (!model.sorted_order.empty()) return pool_sorted(model, candidate);
    return pool_linear(model, candidate);
}

double pmm_point(const PmmColumnModel& model, const double* features) {
    return model.forest.predict(features, model.feature_count());
}

double impute_pmm(const PmmColumnModel& model, const double* features, Rng& rng) {
    const double candidate = model.forest.predict(features, model.feature_count());
    const auto pool = pmm_donor_pool(model, candidate);
    const auto pick = pool[static_cast<std::size_t>(rng.uniform_index(pool.size()))];
    return model.donor_values[static_cast<std::size_t>(pick)];
}

}  // namespace uicast

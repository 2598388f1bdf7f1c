#include "uicast/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uicast/errors.hpp"

namespace uicast {

double persistence_forecast(const SiteWindow& window, double fallback_mean, bool* used_fallback) {
    if (used_fallback) *used_fallback = false;
    for (std::size_t i = window.values.size(); i-- > 0;) {
        if (!window.missing[i]) return window.values[i];
    }
    if (used_fallback) *used_fallback = true;
    return fallback_mean;
}

PredictiveDistribution climatology_distribution(const std::vector<double>& history, std::size_t max_samples) {
    if (history.empty()) throw DataError("climatology: empty history");
    PredictiveDistribution dist;
    if (max_samples == 0 || history.size() <= max_samples) {
        dist.samples = history;
    } else {
        dist.samples.reserve(max_samples);
        const double stride = static_cast<double>(history.size()) / static_cast<double>(max_samples);
        for (std::size_t i = 0; i < max_samples; ++i)
            dist.samples.push_back(history[static_cast<std::size_t>((static_cast<double>(i) + 0.5) * stride)]);
    }
    std::sort(dist.samples.begin(), dist.samples.end());
    return dist;
}

Eigen::MatrixXd mean_impute(const ObservationMatrix& data) {
    const int cols = static_cast<int>(data.cols());
    Eigen::MatrixXd out = data.z;
    for (int j = 0; j < cols; ++j) {
        double sum = 0.0;
        std::size_t n = 0;
        for (Eigen::Index i = 0; i < data.rows(); ++i) {
            if (data.m(i, j) == 0) {
                sum += data.z(i, j);
                ++n;
            }
        }
        if (n == 0) throw DataError("mean_impute: column " + std::to_string(j) + " has no observed values");
        const double mean = sum / static_cast<double>(n);
        for (Eigen::Index i = 0; i < data.rows(); ++i)
            if (data.m(i, j) != 0) out(i, j) = mean;
    }
    return out;
}

Eigen::MatrixXd regression_impute(const ObservationMatrix& data, const FcsConfig& cfg, int threads) {
    return fit_fcs_engine(data, cfg, ImputePolicy::Mean, threads).completed;
}

ItpForecaster ItpForecaster::fit(const ObservationMatrix& train, ItpKind kind, const FcsConfig& cfg, int threads) {
    ItpForecaster f;
    f.kind_ = kind;

    Eigen::MatrixXd completed;
    switch (kind) {
        case ItpKind::MeanImpute:
            completed = mean_impute(train);
            break;
        case ItpKind::RegressionImpute: {
            auto fit = fit_fcs_engine(train, cfg, ImputePolicy::Mean, threads);
            completed = std::move(fit.completed);
            f.imputer_ = std::move(fit.model);
            break;
        }
        case ItpKind::CompleteData:
            if (!(train.m.array() == 0).all())
                throw DataError("complete-data forecaster: training matrix has missing cells");
            completed = train.z;
            break;
    }

    const int feat = static_cast<int>(train.cols()) - 1;
    f.feature_means_.resize(static_cast<std::size_t>(feat));
    for (int j = 0; j < feat; ++j) f.feature_means_[static_cast<std::size_t>(j)] = completed.col(j).mean();

    const Eigen::MatrixXd X = completed.leftCols(feat);
    const Eigen::VectorXd y = completed.col(feat);
    f.forest_ = fit_forest(X, y, cfg.forest, threads);
    return f;
}

double ItpForecaster::predict(const Eigen::VectorXd& features, const MaskVector& feature_mask) const {
    const int feat = forest_.feature_count;
    if (static_cast<int>(features.size()) != feat || static_cast<int>(feature_mask.size()) != feat)
        throw DataError("itp predict: feature length does not match the trained model");

    Eigen::VectorXd x = features;
    bool any_missing = false;
    for (int j = 0; j < feat; ++j) any_missing = any_missing || feature_mask[static_cast<std::size_t>(j)];

    if (any_missing) {
        switch (kind_) {
            case ItpKind::MeanImpute:
                for (int j = 0; j < feat; ++j)
                    if (feature_mask[static_cast<std::size_t>(j)]) x(j) = feature_means_[static_cast<std::size_t>(j)];
                break;
            case ItpKind::RegressionImpute: {
                // Complete the row through the imputer (target treated as
                // missing), then keep the feature part.
                Eigen::VectorXd row(feat + 1);
                row.head(feat) = features;
                row(feat) = std::numeric_limits<double>::quiet_NaN();
                MaskVector mask(feature_mask);
                mask.push_back(1);
                const Eigen::VectorXd done = impute_row_replicate(
                    *imputer_, row, mask, imputer_->config.operational_iterations, 0, ImputePolicy::Mean);
                x = done.head(feat);
                break;
            }
            case ItpKind::CompleteData:
                throw DataError("complete-data forecaster: feature row has missing values");
        }
    }
    return forest_.predict(x.data(), feat);
}

PatternKey PatternKey::from_feature_mask(const MaskVector& feature_mask) {
    PatternKey key;
    key.observed.reserve(feature_mask.size());
    for (auto m : feature_mask) key.observed.push_back(m == 0 ? 1 : 0);
    return key;
}

std::string PatternKey::to_string() const {
    std::string s;
    s.reserve(observed.size());
    for (auto o : observed) s.push_back(o ? '1' : '0');
    return s;
}

PatternForecasters PatternForecasters::fit(const ObservationMatrix& train, const std::vector<PatternKey>& patterns,
                                           const ForestConfig& forest_cfg, int min_rows, int threads) {
    const int feat = static_cast<int>(train.cols()) - 1;
    const int target = feat;
    PatternForecasters out;

    for (const auto& pattern : patterns) {
        if (static_cast<int>(pattern.observed.size()) != feat)
            throw ConfigError("retrain: pattern length " + std::to_string(pattern.observed.size()) +
                              " does not match feature count " + std::to_string(feat));
        PatternModel pm;
        for (int j = 0; j < feat; ++j)
            if (pattern.observed[static_cast<std::size_t>(j)]) pm.feature_subset.push_back(j);
        if (pm.feature_subset.empty())
            throw ConfigError("retrain: pattern " + pattern.to_string() + " observes no features");

        std::vector<int> rows;
        for (Eigen::Index i = 0; i < train.rows(); ++i) {
            if (train.m(i, target) != 0) continue;
            bool usable = true;
            for (int j : pm.feature_subset) usable = usable && train.m(i, j) == 0;
            if (usable) rows.push_back(static_cast<int>(i));
        }
        if (static_cast<int>(rows.size()) < std::max(min_rows, 1))
            throw ConfigError("retrain: pattern " + pattern.to_string() + " has only " +
                              std::to_string(rows.size()) + " usable training rows (need " +
                              std::to_string(std::max(min_rows, 1)) + ")");

        Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(pm.feature_subset.size()));
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t c = 0; c < pm.feature_subset.size(); ++c)
                X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                    train.z(rows[i], pm.feature_subset[c]);
            y(static_cast<Eigen::Index>(i)) = train.z(rows[i], target);
        }
        pm.forest = fit_forest(X, y, forest_cfg, threads);
        out.models_.emplace(pattern.to_string(), std::move(pm));
    }
    return out;
}

double PatternForecasters::predict(const Eigen::VectorXd& features, const MaskVector& feature_mask) const {
    const auto key = PatternKey::from_feature_mask(feature_mask).to_string();
    const auto it = models_.find(key);
    if (it == models_.end())
        throw ConfigError("retrain: no model trained for missingness pattern " + key);

    const auto& pm = it->second;
    Eigen::VectorXd x(static_cast<Eigen::Index>(pm.feature_subset.size()));
    for (std::size_t c = 0; c < pm.feature_subset.size(); ++c)
        x(static_cast<Eigen::Index>(c)) = features(pm.feature_subset[c]);
    return pm.forest.predict(x.data(), static_cast<int>(pm.feature_subset.size()));
}

}  // namespace uicast

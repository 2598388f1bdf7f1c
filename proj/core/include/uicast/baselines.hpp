#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uicast/embedding.hpp"
#include "uicast/fcs.hpp"
#include "uicast/forecast.hpp"

namespace uicast {

/// The most recent observed value in the window; when the window is fully
/// missing, falls back to `fallback_mean` (callers log the event via
/// used_fallback).
double persistence_forecast(const SiteWindow& window, double fallback_mean, bool* used_fallback = nullptr);

/// The empirical distribution of all observed historical values, identical
/// for every issue time. Histories beyond max_samples are thinned by an
/// even deterministic stride. max_samples = 0 disables the cap.
PredictiveDistribution climatology_distribution(const std::vector<double>& history, std::size_t max_samples = 10000);

/// Every missing cell replaced by its column's observed mean.
Eigen::MatrixXd mean_impute(const ObservationMatrix& data);

/// Iterative random-forest conditional-mean imputation: the FCS engine with
/// donor draws replaced by the regression prediction. Deterministic.
Eigen::MatrixXd regression_impute(const ObservationMatrix& data, const FcsConfig& cfg, int threads = 1);

enum class ItpKind { MeanImpute, RegressionImpute, CompleteData };

/// Impute-then-predict point forecaster: completes the training matrix with
/// the chosen imputation, fits one forest of features onto the target, and
/// at operation imputes the feature row the same way before predicting.
/// CompleteData skips imputation and requires complete inputs throughout.
class ItpForecaster {
public:
    static ItpForecaster fit(const ObservationMatrix& train, ItpKind kind, const FcsConfig& cfg, int threads = 1);

    double predict(const Eigen::VectorXd& features, const MaskVector& feature_mask) const;

    ItpKind kind() const { return kind_; }

private:
    ItpKind kind_ = ItpKind::CompleteData;
    std::vector<double> feature_means_;     // mean-impute path
    std::optional<FcsModel> imputer_;       // regression-impute path
    RandomForestModel forest_;
};

/// Which of the pk feature positions are observed. The string form is a
/// '0'/'1' sequence ordered by column.
struct PatternKey {
    std::vector<std::uint8_t> observed;

    static PatternKey from_feature_mask(const MaskVector& feature_mask);
    std::string to_string() const;
};

/// One forest per requested missingness pattern, each trained on the
/// pattern's observed feature subset using only rows fully observed on that
/// subset (targets included). Lookup at forecast time is by exact pattern;
/// an unseen pattern is an error, never a silent fallback.
class PatternForecasters {
public:
    static PatternForecasters fit(const ObservationMatrix& train, const std::vector<PatternKey>& patterns,
                                  const ForestConfig& forest_cfg, int min_rows = 1, int threads = 1);

    double predict(const Eigen::VectorXd& features, const MaskVector& feature_mask) const;

    std::size_t pattern_count() const { return models_.size(); }

private:
    struct PatternModel {
        std::vector<int> feature_subset;
        RandomForestModel forest;
    };
    std::map<std::string, PatternModel> models_;
};

}  // namespace uicast

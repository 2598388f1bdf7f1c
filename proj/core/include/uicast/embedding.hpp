#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "uicast/series.hpp"

namespace uicast {

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using MaskVector = std::vector<std::uint8_t>;

/// Lag-embedding layout: k lags per site as features, one h-step-ahead
/// target for the chosen site. Sites and columns are 0-based.
struct EmbeddingSpec {
    int sites = 1;        // p
    int lags = 6;         // k
    int lead = 1;         // h
    int target_site = 0;  // n

    int columns() const { return sites * lags + 1; }
    void validate() const;
};

/// What a matrix column holds: a lagged feature of one site, or the target.
struct ColumnRole {
    int site = 0;
    int lag_back = 0;   // steps back from the issue time; -lead for the target
    bool is_target = false;
};

/// The embedded dataset: z holds values, m flags missingness (1 = missing).
/// Cells with m=1 contain NaN and must never be read as data. The target is
/// always the last column.
struct ObservationMatrix {
    Eigen::MatrixXd z;
    MaskMatrix m;
    std::vector<ColumnRole> column_roles;
    std::vector<std::int64_t> issue_times;   // timestamp of the newest lag per row
    std::vector<std::int64_t> target_times;  // issue time + lead steps
    std::size_t dropped_all_missing = 0;     // fully-missing rows removed during construction

    Eigen::Index rows() const { return z.rows(); }
    Eigen::Index cols() const { return z.cols(); }
    int target_column() const { return static_cast<int>(z.cols()) - 1; }

    /// Row indices (ascending) where column j is observed.
    std::vector<int> observed_rows(int j) const;
};

/// Builds the training matrix from p equal-length series. Rows whose target
/// is missing are kept (the estimation stage imputes them); rows with every
/// cell missing carry no information and are dropped (counted in
/// dropped_all_missing).
ObservationMatrix build_training_matrix(const std::vector<SiteSeries>& series, const EmbeddingSpec& spec);

/// Per-site window of the k most recent values at an issue time.
struct SiteWindow {
    std::vector<double> values;           // oldest first, length k
    std::vector<std::uint8_t> missing;    // 1 = missing
};

/// One operational feature row. The target position is always flagged
/// missing; feature flags mirror the window missingness.
struct ForecastRow {
    Eigen::VectorXd z;
    MaskVector mask;
};

ForecastRow build_forecast_row(const std::vector<SiteWindow>& recent, const EmbeddingSpec& spec);

}  // namespace uicast

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "uicast/transform.hpp"

namespace uicast {

/// Empirical predictive distribution: the replicate target values,
/// back-transformed to the original domain when a transform is configured
/// (in which case every sample lies in [0,1]). Samples are kept sorted.
struct PredictiveDistribution {
    std::vector<double> samples;  // ascending
    std::int64_t issue_time = 0;
    int lead = 1;
    int site = 0;

    double mean() const;
    /// Empirical quantile with (i-0.5)/L plotting positions, linear
    /// interpolation between order statistics and clamping at the extremes.
    /// q must lie in (0,1).
    double quantile(double q) const;
};

/// Pulls the target (last) entry out of each completed replicate row and
/// maps it back to the original domain.
PredictiveDistribution extract_target_samples(const std::vector<Eigen::VectorXd>& replicates,
                                              const std::optional<TransformSpec>& transform,
                                              std::int64_t issue_time = 0, int lead = 1, int site = 0);

/// The point forecast: the average of the samples.
double point_forecast(const PredictiveDistribution& dist);

double quantile(const PredictiveDistribution& dist, double q);

}  // namespace uicast

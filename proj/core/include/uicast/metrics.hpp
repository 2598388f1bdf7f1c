#pragma once

#include <vector>

#include "uicast/forecast.hpp"

namespace uicast {

/// Point forecast/observation pairs, restricted to times where the
/// observation exists.
struct PointVerification {
    std::vector<double> forecast;
    std::vector<double> observed;
};

/// Probabilistic forecast/observation pairs, same restriction.
struct ProbVerification {
    std::vector<PredictiveDistribution> forecast;
    std::vector<double> observed;
};

double rmse(const PointVerification& set);

/// CRPS of the empirical distribution of `samples` against observation y:
/// mean |x_i - y| - (1/(2L^2)) sum_ij |x_i - x_j|. Evaluated in
/// O(L log L) via sorted order statistics; equal to integrating the squared
/// difference between the empirical CDF and the observation's step function.
double crps_empirical(const std::vector<double>& samples, double y);

double mean_crps(const ProbVerification& set);

struct ReliabilityPoint {
    double nominal = 0.0;    // requested quantile level
    double empirical = 0.0;  // fraction of observations at or below that quantile
};

struct ReliabilityResult {
    std::vector<ReliabilityPoint> points;
    double deviation_percent = 0.0;  // mean over levels of |empirical - nominal| x 100
};

ReliabilityResult reliability_diagram(const ProbVerification& set, const std::vector<double>& levels);

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_reliability_levels();

struct SharpnessPoint {
    double coverage = 0.0;    // nominal central-interval coverage 1 - beta
    double mean_width = 0.0;  // mean of quantile(1-beta/2) - quantile(beta/2)
};

std::vector<SharpnessPoint> sharpness(const ProbVerification& set, const std::vector<double>& coverages);

/// 0.10, 0.20, ..., 0.90.
std::vector<double> default_sharpness_coverages();

}  // namespace uicast

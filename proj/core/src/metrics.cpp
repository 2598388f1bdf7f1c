#include "uicast/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "uicast/errors.hpp"

namespace uicast {

double rmse(const PointVerification& set) {
    if (set.forecast.size() != set.observed.size()) throw DataError("rmse: forecast/observed length mismatch");
    if (set.forecast.empty()) throw DataError("rmse: empty verification set");
    double sum = 0.0;
    for (std::size_t i = 0; i < set.forecast.size(); ++i) {
        const double e = set.forecast[i] - set.observed[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(set.forecast.size()));
}

double crps_empirical(const std::vector<double>& samples, double y) {
    const std::size_t n = samples.size();
    if (n == 0) throw DataError("crps: no samples");

    std::vector<double> x(samples);
    std::sort(x.begin(), x.end());

    double abs_err = 0.0;
    for (double v : x) abs_err += std::abs(v - y);

    // sum_{i<j} (x_(j) - x_(i)) = sum_i (2i - n + 1) x_(i), 0-based i.
    double pair_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        pair_sum += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * x[i];

    const double nn = static_cast<double>(n);
    return abs_err / nn - pair_sum / (nn * nn);
}

double mean_crps(const ProbVerification& set) {
    if (set.forecast.size() != set.observed.size()) throw DataError("crps: forecast/observed length mismatch");
    if (set.forecast.empty()) throw DataError("crps: empty verification set");
    double sum = 0.0;
    for (std::size_t i = 0; i < set.forecast.size(); ++i)
        sum += crps_empirical(set.forecast[i].samples, set.observed[i]);
    return sum / static_cast<double>(set.forecast.size());
}

ReliabilityResult reliability_diagram(const ProbVerification& set, const std::vector<double>& levels) {
    if (set.forecast.size() != set.observed.size())
        throw DataError("reliability: forecast/observed length mismatch");
    if (set.forecast.empty()) throw DataError("reliability: empty verification set");
    if (levels.empty()) throw ConfigError("reliability: no levels requested");

    ReliabilityResult result;
    result.points.reserve(levels.size());
    double deviation = 0.0;
    for (double q : levels) {
        std::size_t covered = 0;
        for (std::size_t i = 0; i < set.forecast.size(); ++i)
            covered += set.observed[i] <= set.forecast[i].quantile(q);
        const double empirical = static_cast<double>(covered) / static_cast<double>(set.forecast.size());
        result.points.push_back({q, empirical});
        deviation += std::abs(empirical - q);
    }
    result.deviation_percent = deviation / static_cast<double>(levels.size()) * 100.0;
    return result;
}

std::vector<double> default_reliability_levels() {
    std::vector<double> levels;
    for (int i = 1; i <= 19; ++i) levels.push_back(static_cast<double>(i) * 0.05);
    return levels;
}

std::vector<SharpnessPoint> sharpness(const ProbVerification& set, const std::vector<double>& coverages) {
    if (set.forecast.empty()) throw DataError("sharpness: empty verification set");
    if (coverages.empty()) throw ConfigError("sharpness: no coverages requested");

    std::vector<SharpnessPoint> out;
    out.reserve(coverages.size());
    for (double c : coverages) {
        const double beta = 1.0 - c;
        double width = 0.0;
        for (const auto& f : set.forecast) width += f.quantile(1.0 - beta / 2.0) - f.quantile(beta / 2.0);
        out.push_back({c, width / static_cast<double>(set.forecast.size())});
    }
    return out;
}

std::vector<double> default_sharpness_coverages() {
    std::vector<double> cov;
    for (int i = 1; i <= 9; ++i) cov.push_back(static_cast<double>(i) * 0.10);
    return cov;
}

}  // namespace uicast

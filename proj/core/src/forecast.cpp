#include "uicast/forecast.hpp"

#include <algorithm>
#include <stdexcept>

#include "uicast/errors.hpp"

namespace uicast {

double PredictiveDistribution::mean() const {
    if (samples.empty()) throw DataError("predictive distribution has no samples");
    double sum = 0.0;
    for (double s : samples) sum += s;
    return sum / static_cast<double>(samples.size());
}

double PredictiveDistribution::quantile(double q) const {
    if (samples.empty()) throw DataError("predictive distribution has no samples");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile: q must lie in (0,1)");
    const std::size_t n = samples.size();
    const double pos = q * static_cast<double>(n) - 0.5;  // inverse of (i-0.5)/n, 0-based
    if (pos <= 0.0) return samples.front();
    if (pos >= static_cast<double>(n - 1)) return samples.back();
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    return samples[lo] + frac * (samples[lo + 1] - samples[lo]);
}

PredictiveDistribution extract_target_samples(const std::vector<Eigen::VectorXd>& replicates,
                                              const std::optional<TransformSpec>& transform,
                                              std::int64_t issue_time, int lead, int site) {
    if (replicates.empty()) throw DataError("extract_target_samples: no replicates");
    PredictiveDistribution dist;
    dist.issue_time = issue_time;
    dist.lead = lead;
    dist.site = site;
    dist.samples.reserve(replicates.size());
    for (const auto& z : replicates) {
        const double raw = z(z.size() - 1);
        dist.samples.push_back(transform ? glogit_inverse(raw, *transform) : raw);
    }
    std::sort(dist.samples.begin(), dist.samples.end());
    return dist;
}

double point_forecast(const PredictiveDistribution& dist) { return dist.mean(); }

double quantile(const PredictiveDistribution& dist, double q) { return dist.quantile(q); }

}  // namespace uicast

#include "uicast/embedding.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "uicast/errors.hpp"

namespace uicast {

void EmbeddingSpec::validate() const {
    if (sites < 1) throw ConfigError("embedding: sites must be >= 1");
    if (lags < 1) throw ConfigError("embedding: lags must be >= 1");
    if (lead < 1) throw ConfigError("embedding: lead must be >= 1");
    if (target_site < 0 || target_site >= sites)
        throw ConfigError("embedding: target_site out of range [0, " + std::to_string(sites - 1) + "]");
}

std::vector<int> ObservationMatrix::observed_rows(int j) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(rows()));
    for (Eigen::Index i = 0; i < rows(); ++i)
        if (m(i, j) == 0) out.push_back(static_cast<int>(i));
    return out;
}

ObservationMatrix build_training_matrix(const std::vector<SiteSeries>& series, const EmbeddingSpec& spec) {
    spec.validate();
    if (static_cast<int>(series.size()) != spec.sites)
        throw DataError("build_training_matrix: got " + std::to_string(series.size()) + " series, spec needs " +
                        std::to_string(spec.sites));

    const std::size_t length = series.front().size();
    for (const auto& s : series) {
        if (s.size() != length)
            throw DataError("build_training_matrix: series '" + s.site_id + "' length " +
                            std::to_string(s.size()) + " differs from " + std::to_string(length));
    }
    const int k = spec.lags, h = spec.lead;
    if (length < static_cast<std::size_t>(k + h))
        throw DataError("build_training_matrix: series length " + std::to_string(length) +
                        " shorter than lags + lead = " + std::to_string(k + h));

    const std::size_t total_rows = length - static_cast<std::size_t>(k + h) + 1;
    const int cols = spec.columns();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ObservationMatrix out;
    out.column_roles.reserve(static_cast<std::size_t>(cols));
    for (int s = 0; s < spec.sites; ++s)
        for (int lag = k - 1; lag >= 0; --lag) out.column_roles.push_back({s, lag, false});
    out.column_roles.push_back({spec.target_site, -h, true});

    out.z.resize(static_cast<Eigen::Index>(total_rows), cols);
    out.m.resize(static_cast<Eigen::Index>(total_rows), cols);
    out.issue_times.reserve(total_rows);
    out.target_times.reserve(total_rows);

    Eigen::Index r = 0;
    for (std::size_t u = static_cast<std::size_t>(k) - 1; u + h < length; ++u) {
        int col = 0;
        bool any_observed = false;
        for (int s = 0; s < spec.sites; ++s) {
            const auto& ser = series[static_cast<std::size_t>(s)];
            for (int lag = k - 1; lag >= 0; --lag, ++col) {
                const std::size_t t = u - static_cast<std::size_t>(lag);
                if (ser.missing[t]) {
                    out.z(r, col) = nan;
                    out.m(r, col) = 1;
                } else {
                    out.z(r, col) = ser.values[t];
                    out.m(r, col) = 0;
                    any_observed = true;
                }
            }
        }
        const auto& tser = series[static_cast<std::size_t>(spec.target_site)];
        const std::size_t tt = u + static_cast<std::size_t>(h);
        if (tser.missing[tt]) {
            out.z(r, col) = nan;
            out.m(r, col) = 1;
        } else {
            out.z(r, col) = tser.values[tt];
            out.m(r, col) = 0;
            any_observed = true;
        }
        if (!any_observed) {
            ++out.dropped_all_missing;
            continue;  // row carries no information
        }
        out.issue_times.push_back(series.front().timestamps[u]);
        out.target_times.push_back(series.front().timestamps[u] +
                                   static_cast<std::int64_t>(h) *
                                       (length > 1 ? series.front().timestamps[1] - series.front().timestamps[0]
                                                   : 1));
        ++r;
    }
    out.z.conservativeResize(r, cols);
    out.m.conservativeResize(r, cols);
    return out;
}

ForecastRow build_forecast_row(const std::vector<SiteWindow>& recent, const EmbeddingSpec& spec) {
    spec.validate();
    if (static_cast<int>(recent.size()) != spec.sites)
        throw DataError("build_forecast_row: got " + std::to_string(recent.size()) + " windows, spec needs " +
                        std::to_string(spec.sites));
    const int k = spec.lags;
    const int cols = spec.columns();

    ForecastRow row;
    row.z.resize(cols);
    row.mask.assign(static_cast<std::size_t>(cols), 0);

    int col = 0;
    for (int s = 0; s < spec.sites; ++s) {
        const auto& w = recent[static_cast<std::size_t>(s)];
        if (static_cast<int>(w.values.size()) != k || static_cast<int>(w.missing.size()) != k)
            throw DataError("build_forecast_row: site " + std::to_string(s) + " window length != lags");
        for (int i = 0; i < k; ++i, ++col) {
            if (w.missing[static_cast<std::size_t>(i)]) {
                row.z(col) = std::numeric_limits<double>::quiet_NaN();
                row.mask[static_cast<std::size_t>(col)] = 1;
            } else {
                row.z(col) = w.values[static_cast<std::size_t>(i)];
            }
        }
    }
    row.z(col) = std::numeric_limits<double>::quiet_NaN();
    row.mask[static_cast<std::size_t>(col)] = 1;  // the target is what we forecast
    return row;
}

}  // namespace uicast

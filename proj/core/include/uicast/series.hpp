#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uicast/transform.hpp"

namespace uicast {

/// One site's time series at uniform 1-step resolution. Entries flagged in
/// `missing` hold no meaningful value and must never be read as data.
struct SiteSeries {
    std::string site_id;
    std::vector<double> values;
    std::vector<std::uint8_t> missing;      // 1 = missing
    std::vector<std::int64_t> timestamps;   // strictly increasing, uniform step

    std::size_t size() const { return values.size(); }

    /// Checks internal consistency: matching lengths, uniform strictly
    /// increasing timestamps, finite observed values. With require_bounded,
    /// observed values must lie in [0,1].
    void validate(bool require_bounded = false) const;
};

/// Counts observed (non-missing) entries.
std::size_t observed_count(const SiteSeries& s);

/// Replaces flagged entries with NaN and marks them missing.
void apply_mask(SiteSeries& s, const std::vector<std::uint8_t>& mask);

/// Applies the generalized logit to every observed value in place.
void transform_series(SiteSeries& s, const TransformSpec& spec);

/// Reads a multi-site CSV: header `timestamp,<site>,<site>,...`; empty cells
/// or "NA" are missing. All series share the timestamp column.
std::vector<SiteSeries> read_series_csv(const std::string& path);

/// Writes the same layout; missing cells are emitted empty. Values are
/// printed with shortest round-trip precision so a read-back reproduces both
/// values and mask bit-exactly.
void write_series_csv(const std::string& path, const std::vector<SiteSeries>& series);

}  // namespace uicast

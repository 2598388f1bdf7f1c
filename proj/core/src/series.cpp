#include "uicast/series.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "uicast/errors.hpp"

namespace uicast {

void SiteSeries::validate(bool require_bounded) const {
    const std::size_t n = values.size();
    if (missing.size() != n || timestamps.size() != n)
        throw DataError("series '" + site_id + "': values/missing/timestamps lengths differ");
    if (n == 0) throw DataError("series '" + site_id + "' is empty");
    if (n > 1) {
        const std::int64_t step = timestamps[1] - timestamps[0];
        if (step <= 0) throw DataError("series '" + site_id + "': timestamps not strictly increasing");
        for (std::size_t i = 1; i < n; ++i) {
            if (timestamps[i] - timestamps[i - 1] != step)
                throw DataError("series '" + site_id + "': non-uniform timestamp spacing at row " +
                                std::to_string(i));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (missing[i]) continue;
        if (!std::isfinite(values[i]))
            throw DataError("series '" + site_id + "': non-finite observed value at row " + std::to_string(i));
        if (require_bounded && (values[i] < 0.0 || values[i] > 1.0))
            throw DataError("series '" + site_id + "': value outside [0,1] at row " + std::to_string(i));
    }
}

std::size_t observed_count(const SiteSeries& s) {
    std::size_t n = 0;
    for (auto m : s.missing) n += m == 0;
    return n;
}

void apply_mask(SiteSeries& s, const std::vector<std::uint8_t>& mask) {
    if (mask.size() != s.values.size())
        throw DataError("apply_mask: mask length " + std::to_string(mask.size()) +
                        " does not match series length " + std::to_string(s.values.size()));
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            s.missing[i] = 1;
            s.values[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
}

void transform_series(SiteSeries& s, const TransformSpec& spec) {
    spec.validate();
    for (std::size_t i = 0; i < s.values.size(); ++i)
        if (!s.missing[i]) s.values[i] = glogit_forward(s.values[i], spec);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool is_missing_cell(const std::string& cell) {
    return cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN";
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw DataError("format_double: conversion failed");
    return std::string(buf, p);
}

}  // namespace

std::vector<SiteSeries> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_line(line);
    if (header.size() < 2) throw DataError(path + ": header must be timestamp,<site>,...");

    std::vector<SiteSeries> series(header.size() - 1);
    for (std::size_t s = 0; s < series.size(); ++s) series[s].site_id = header[s + 1];

    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw DataError(path + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));

        std::int64_t ts = 0;
        auto [p, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), ts);
        if (ec != std::errc{} || p != cells[0].data() + cells[0].size())
            throw DataError(path + ": row " + std::to_string(row) + ": bad timestamp '" + cells[0] + "'");

        for (std::size_t s = 0; s < series.size(); ++s) {
            series[s].timestamps.push_back(ts);
            const std::string& cell = cells[s + 1];
            if (is_missing_cell(cell)) {
                series[s].values.push_back(std::numeric_limits<double>::quiet_NaN());
                series[s].missing.push_back(1);
            } else {
                double v = 0.0;
                auto [vp, vec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (vec != std::errc{} || vp != cell.data() + cell.size())
                    throw DataError(path + ": row " + std::to_string(row) + ": bad value '" + cell + "'");
                series[s].values.push_back(v);
                series[s].missing.push_back(0);
            }
        }
        ++row;
    }
    for (const auto& s : series) s.validate(false);
    return series;
}

void write_series_csv(const std::string& path, const std::vector<SiteSeries>& series) {
    if (series.empty()) throw DataError("write_series_csv: no series");
    const std::size_t n = series.front().size();
    for (const auto& s : series) {
        if (s.size() != n) throw DataError("write_series_csv: series lengths differ");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);

    out << "timestamp";
    for (const auto& s : series) out << ',' << s.site_id;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out << series.front().timestamps[i];
        for (const auto& s : series) {
            out << ',';
            if (!s.missing[i]) out << format_double(s.values[i]);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace uicast

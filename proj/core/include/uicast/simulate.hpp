#pragma once

#include <array>
#include <utility>

#include "uicast/rng.hpp"
#include "uicast/series.hpp"

namespace uicast {

/// Order-2 autoregression y_t = a0 + a1 y_{t-1} + a2 y_{t-2} + e_t with
/// centered Gaussian noise.
struct ArSpec {
    std::array<double, 3> alpha{1.0, 0.33, 0.5};
    double noise_var = 0.01;
    int length = 8760;
    int burn_in = 500;
};

/// Order-2 two-series vector autoregression. Each equation's coefficients
/// are ordered {constant, series-1 lag 1, series-1 lag 2, series-2 lag 1,
/// series-2 lag 2}.
struct VarSpec {
    std::array<double, 5> eq1{1.0, 0.88, -0.1, 0.15, -0.14};
    std::array<double, 5> eq2{1.0, 0.69, -0.05, 0.07, -0.23};
    double noise_var = 0.01;
    int length = 8760;
    int burn_in = 500;
};

/// Stationarity checks: all companion-matrix eigenvalues strictly inside the
/// unit circle.
bool ar_stationary(const ArSpec& spec);
bool var_stationary(const VarSpec& spec);

/// The deterministic fixed point reached with zero noise.
double ar_fixed_point(const ArSpec& spec);
std::pair<double, double> var_fixed_point(const VarSpec& spec);

/// Simulates the process, discarding burn_in initial steps. Nonstationary
/// coefficients are rejected.
SiteSeries gen_ar(const ArSpec& spec, Rng& rng);
std::pair<SiteSeries, SiteSeries> gen_var(const VarSpec& spec, Rng& rng);

/// Every entry independently missing with probability rate; rate must lie
/// in [0, 0.5]. Only the length is visible to the generator, so the mask is
/// independent of the data by construction.
std::vector<std::uint8_t> inject_sporadic(std::size_t length, double rate, Rng& rng);

struct BlockSpec {
    int count = 600;
    int len_min = 5;
    int len_max = 30;
};

/// `count` block start positions uniform over the series, lengths uniform
/// in [len_min, len_max]; overlapping blocks merge and blocks truncate at
/// the series end.
std::vector<std::uint8_t> inject_blocks(std::size_t length, const BlockSpec& spec, Rng& rng);

}  // namespace uicast

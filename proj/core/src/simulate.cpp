#include "uicast/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uicast/errors.hpp"

namespace uicast {

namespace {

bool spectral_radius_below_one(const Eigen::MatrixXd& companion) {
    const Eigen::VectorXcd eig = companion.eigenvalues();
    for (Eigen::Index i = 0; i < eig.size(); ++i)
        if (std::abs(eig(i)) >= 1.0 - 1e-12) return false;
    return true;
}

std::vector<std::int64_t> hour_index(int length) {
    std::vector<std::int64_t> ts(static_cast<std::size_t>(length));
    std::iota(ts.begin(), ts.end(), 0);
    return ts;
}

}  // namespace

bool ar_stationary(const ArSpec& spec) {
    Eigen::MatrixXd c(2, 2);
    c << spec.alpha[1], spec.alpha[2], 1.0, 0.0;
    return spectral_radius_below_one(c);
}

bool var_stationary(const VarSpec& spec) {
    // State [y1_t, y2_t, y1_{t-1}, y2_{t-1}].
    Eigen::MatrixXd c(4, 4);
    c << spec.eq1[1], spec.eq1[3], spec.eq1[2], spec.eq1[4],
         spec.eq2[1], spec.eq2[3], spec.eq2[2], spec.eq2[4],
         1.0, 0.0, 0.0, 0.0,
         0.0, 1.0, 0.0, 0.0;
    return spectral_radius_below_one(c);
}

double ar_fixed_point(const ArSpec& spec) {
    return spec.alpha[0] / (1.0 - spec.alpha[1] - spec.alpha[2]);
}

std::pair<double, double> var_fixed_point(const VarSpec& spec) {
    Eigen::Matrix2d a;
    a << 1.0 - spec.eq1[1] - spec.eq1[2], -spec.eq1[3] - spec.eq1[4],
         -spec.eq2[1] - spec.eq2[2], 1.0 - spec.eq2[3] - spec.eq2[4];
    Eigen::Vector2d b(spec.eq1[0], spec.eq2[0]);
    const Eigen::Vector2d mu = a.colPivHouseholderQr().solve(b);
    return {mu(0), mu(1)};
}

SiteSeries gen_ar(const ArSpec& spec, Rng& rng) {
    if (spec.length < 1) throw ConfigError("gen_ar: length must be >= 1");
    if (spec.burn_in < 0) throw ConfigError("gen_ar: burn_in must be >= 0");
    if (!(spec.noise_var >= 0.0)) throw ConfigError("gen_ar: noise_var must be >= 0");
    if (!ar_stationary(spec)) throw ConfigError("gen_ar: coefficients are not stationary");

    const double sd = std::sqrt(spec.noise_var);
    const double mu = ar_fixed_point(spec);

    SiteSeries out;
    out.site_id = "site_1";
    out.values.reserve(static_cast<std::size_t>(spec.length));
    out.missing.assign(static_cast<std::size_t>(spec.length), 0);
    out.timestamps = hour_index(spec.length);

    double y1 = mu, y2 = mu;  // start at the fixed point; burn-in clears any transient
    const int total = spec.length + spec.burn_in;
    for (int t = 0; t < total; ++t) {
        const double y = spec.alpha[0] + spec.alpha[1] * y1 + spec.alpha[2] * y2 +
                         (sd > 0.0 ? rng.normal(0.0, sd) : 0.0);
        y2 = y1;
        y1 = y;
        if (t >= spec.burn_in) out.values.push_back(y);
    }
    return out;
}

std::pair<SiteSeries, SiteSeries> gen_var(const VarSpec& spec, Rng& rng) {
    if (spec.length < 1) throw ConfigError("gen_var: length must be >= 1");
    if (spec.burn_in < 0) throw ConfigError("gen_var: burn_in must be >= 0");
    if (!(spec.noise_var >= 0.0)) throw ConfigError("gen_var: noise_var must be >= 0");
    if (!var_stationary(spec)) throw ConfigError("gen_var: coefficients are not stationary");

    const double sd = std::sqrt(spec.noise_var);
    const auto [mu1, mu2] = var_fixed_point(spec);

    SiteSeries s1, s2;
    s1.site_id = "site_1";
    s2.site_id = "site_2";
    s1.values.reserve(static_cast<std::size_t>(spec.length));
    s2.values.reserve(static_cast<std::size_t>(spec.length));
    s1.missing.assign(static_cast<std::size_t>(spec.length), 0);
    s2.missing.assign(static_cast<std::size_t>(spec.length), 0);
    s1.timestamps = hour_index(spec.length);
    s2.timestamps = s1.timestamps;

    double a1 = mu1, a2 = mu1;  // series 1 lags
    double b1 = mu2, b2 = mu2;  // series 2 lags
    const int total = spec.length + spec.burn_in;
    for (int t = 0; t < total; ++t) {
        const double e1 = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
        const double e2 = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
        const double y1 = spec.eq1[0] + spec.eq1[1] * a1 + spec.eq1[2] * a2 + spec.eq1[3] * b1 +
                          spec.eq1[4] * b2 + e1;
        const double y2 = spec.eq2[0] + spec.eq2[1] * a1 + spec.eq2[2] * a2 + spec.eq2[3] * b1 +
                          spec.eq2[4] * b2 + e2;
        a2 = a1;
        a1 = y1;
        b2 = b1;
        b1 = y2;
        if (t >= spec.burn_in) {
            s1.values.push_back(y1);
            s2.values.push_back(y2);
        }
    }
    return {std::move(s1), std::move(s2)};
}

std::vector<std::uint8_t> inject_sporadic(std::size_t length, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate <= 0.5))
        throw std::invalid_argument("inject_sporadic: rate must lie in [0, 0.5]");
    std::vector<std::uint8_t> mask(length, 0);
    if (rate == 0.0) return mask;
    for (std::size_t i = 0; i < length; ++i) mask[i] = rng.uniform() < rate ? 1 : 0;
    return mask;
}

std::vector<std::uint8_t> inject_blocks(std::size_t length, const BlockSpec& spec, Rng& rng) {
    if (spec.count < 1) throw std::invalid_argument("inject_blocks: count must be >= 1");
    if (spec.len_min < 1 || spec.len_min > spec.len_max)
        throw std::invalid_argument("inject_blocks: need 1 <= len_min <= len_max");

    std::vector<std::uint8_t> mask(length, 0);
    for (int b = 0; b < spec.count; ++b) {
        const auto start = static_cast<std::size_t>(rng.uniform_index(length));
        const auto len = static_cast<std::size_t>(rng.uniform_int(spec.len_min, spec.len_max));
        const std::size_t end = std::min(length, start + len);
        for (std::size_t i = start; i < end; ++i) mask[i] = 1;
    }
    return mask;
}

}  // namespace uicast

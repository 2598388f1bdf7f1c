#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uicast/errors.hpp"

namespace uicast {

/// Generalized logit mapping between normalized power in [0,1] and the real
/// line: x = ln(c^nu / (1 - c^nu)) with c = clamp(y, eps, 1-eps). nu = 1
/// reduces to the plain logit.
struct TransformSpec {
    double nu = 1.0;    // shape exponent, > 0
    double eps = 1e-3;  // clipping margin, in (0, 0.5)

    void validate() const {
        if (!(nu > 0.0)) throw ConfigError("transform: nu must be positive");
        if (!(eps > 0.0 && eps < 0.5)) throw ConfigError("transform: eps must lie in (0, 0.5)");
    }
};

inline double glogit_forward(double y, const TransformSpec& spec) {
    if (!std::isfinite(y)) throw std::invalid_argument("glogit_forward: non-finite input");
    const double c = std::clamp(y, spec.eps, 1.0 - spec.eps);
    const double cn = std::pow(c, spec.nu);
    return std::log(cn / (1.0 - cn));
}

inline double glogit_inverse(double x, const TransformSpec& spec) {
    if (!std::isfinite(x)) throw std::invalid_argument("glogit_inverse: non-finite input");
    // 1/(1+e^-x) stays accurate for large |x| in both directions.
    const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    return std::pow(s, 1.0 / spec.nu);
}

}  // namespace uicast

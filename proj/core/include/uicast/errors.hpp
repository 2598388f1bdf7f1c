#pragma once

#include <stdexcept>
#include <string>

namespace uicast {

/// Invalid configuration: bad hyperparameters, unknown method names,
/// mismatched model/embedding specs. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data: CSV parse failures, length
/// mismatches, empty histories. The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace uicast

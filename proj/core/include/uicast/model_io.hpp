#pragma once

#include <string>

#include "uicast/fcs.hpp"

namespace uicast {

inline constexpr const char* kVersion = "0.1.0";

/// Writes the fitted model (column models with forests, candidates and
/// donors, configuration, seeds, embedding and transform specs) to a
/// versioned JSON file.
void save_fcs_model(const FcsModel& model, const std::string& path);

/// Loads a model written by save_fcs_model. Unknown formats or versions are
/// rejected.
FcsModel load_fcs_model(const std::string& path);

}  // namespace uicast

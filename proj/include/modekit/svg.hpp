#pragma once

#include <span>
#include <string>
#include <vector>

#include "modekit/decompose.hpp"

namespace modekit {

/// Stacked panels: the input, every IMF, then the residue.
std::string render_modes_svg(std::span<const double> input, const Decomposition& decomp,
                             const std::string& title);

/// One polyline of `values` against categorical `labels`. Uses a log10 axis
/// when every value is positive.
std::string render_series_svg(const std::vector<std::string>& labels,
                              const std::vector<double>& values, const std::string& title,
                              const std::string& y_label);

}  // namespace modekit

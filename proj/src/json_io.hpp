#pragma once

// JSON helpers shared by the sweep spec parser and the CLI.

#include <string>

#include <json.hpp>

#include "modekit/metrics.hpp"
#include "modekit/sifting.hpp"

namespace modekit {

// {"kind": "fixed-check"|"fixed"|"sd"|"dual", ...parameters, "max_iter": N}
StopCriterion criterion_from_json(const nlohmann::json& j);
nlohmann::json criterion_to_json(const StopCriterion& c);

nlohmann::json report_to_json(const DecompositionReport& r);

}  // namespace modekit

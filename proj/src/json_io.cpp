#include "json_io.hpp"

namespace modekit {

using json = nlohmann::json;

StopCriterion criterion_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::parse_error, "criterion must be a JSON object");
  const std::string kind = j.value("kind", std::string("dual"));
  const int max_iter = j.value("max_iter", kDefaultMaxIter);
  if (kind == "fixed-check") {
    return StopCriterion::fixed_with_imf_check(j.value("n", 10), j.value("consecutive", 1),
                                               max_iter);
  }
  if (kind == "fixed") return StopCriterion::fixed_exact(j.value("n", 10), max_iter);
  if (kind == "sd") return StopCriterion::standard_deviation(j.value("threshold", 0.2), max_iter);
  if (kind == "dual") {
    return StopCriterion::dual_threshold(j.value("theta1", 0.05), j.value("theta2", 0.5),
                                         j.value("alpha", 0.05), max_iter);
  }
  throw Error(ErrorKind::invalid_argument, "unknown criterion kind: " + kind);
}

json criterion_to_json(const StopCriterion& c) {
  json j{{"kind", std::string(c.kind())}, {"max_iter", c.max_iter}};
  if (const auto* r = std::get_if<FixedWithImfCheck>(&c.rule)) {
    j["n"] = r->n;
    j["consecutive"] = r->consecutive;
  } else if (const auto* r = std::get_if<FixedExact>(&c.rule)) {
    j["n"] = r->n;
  } else if (const auto* r = std::get_if<StandardDeviation>(&c.rule)) {
    j["threshold"] = r->sd_threshold;
  } else if (const auto* r = std::get_if<DualThreshold>(&c.rule)) {
    j["theta1"] = r->theta1;
    j["theta2"] = r->theta2;
    j["alpha"] = r->alpha;
  }
  return j;
}

json report_to_json(const DecompositionReport& r) {
  json modes = json::array();
  for (const auto& m : r.per_mode) {
    modes.push_back({
        {"iterations", m.iterations},
        {"mean_period_samples",
         m.mean_period_samples ? json(*m.mean_period_samples) : json(nullptr)},
        {"energy", m.energy},
    });
  }
  return {
      {"imf_count", r.imf_count},
      {"total_iterations", r.total_iterations},
      {"elapsed_seconds", r.elapsed_seconds},
      {"ecm", r.ecm},
      {"ecm_relative", r.ecm_relative},
      {"orthogonality_index",
       r.orthogonality_index ? json(*r.orthogonality_index) : json(nullptr)},
      {"per_mode", modes},
  };
}

}  // namespace modekit

#include "modekit/sifting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace modekit {

namespace {

double max_abs(std::span<const double> x) noexcept {
  double m = 0.0;
  for (const double v : x) m = std::max(m, std::abs(v));
  return m;
}

bool balanced_counts(std::size_t extrema, std::size_t crossings) noexcept {
  const auto diff = static_cast<long long>(extrema) - static_cast<long long>(crossings);
  return std::llabs(diff) <= 1;
}

bool mean_small(const EnvelopePair& env, std::span<const double> d, double tolerance) noexcept {
  return max_abs(env.mean) <= tolerance * max_abs(d);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

StopCriterion StopCriterion::fixed_with_imf_check(int n, int consecutive, int max_iter) {
  StopCriterion c{FixedWithImfCheck{n, consecutive}, max_iter};
  c.validate();
  return c;
}

StopCriterion StopCriterion::fixed_exact(int n, int max_iter) {
  StopCriterion c{FixedExact{n}, max_iter};
  c.validate();
  return c;
}

StopCriterion StopCriterion::standard_deviation(double sd_threshold, int max_iter) {
  StopCriterion c{StandardDeviation{sd_threshold}, max_iter};
  c.validate();
  return c;
}

StopCriterion StopCriterion::dual_threshold(double theta1, double theta2, double alpha,
                                            int max_iter) {
  StopCriterion c{DualThreshold{theta1, theta2, alpha}, max_iter};
  c.validate();
  return c;
}

void StopCriterion::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorKind::invalid_argument, what); };
  if (max_iter < 1) fail("max_iter must be >= 1");
  std::visit(overloaded{
                 [&](const FixedWithImfCheck& r) {
                   if (r.n < 1) fail("n must be >= 1");
                   if (r.consecutive < 1) fail("consecutive must be >= 1");
                 },
                 [&](const FixedExact& r) {
                   if (r.n < 1) fail("n must be >= 1");
                   if (r.n > max_iter) fail("n must not exceed max_iter");
                 },
                 [&](const StandardDeviation& r) {
                   if (!(r.sd_threshold > 0.0)) fail("sd threshold must be positive");
                 },
                 [&](const DualThreshold& r) {
                   if (!(r.theta1 > 0.0)) fail("theta1 must be positive");
                   if (!(r.theta2 > r.theta1)) fail("theta2 must exceed theta1");
                   if (!(r.alpha > 0.0 && r.alpha < 1.0)) fail("alpha must lie in (0, 1)");
                 },
             },
             rule);
}

std::string_view StopCriterion::kind() const noexcept {
  switch (rule.index()) {
    case 0: return "fixed-check";
    case 1: return "fixed";
    case 2: return "sd";
    default: return "dual";
  }
}

std::string StopCriterion::label() const {
  return std::visit(
      overloaded{
          [](const FixedWithImfCheck& r) {
            std::string s = "fixed-check(" + std::to_string(r.n);
            if (r.consecutive != 1) s += "," + std::to_string(r.consecutive);
            return s + ")";
          },
          [](const FixedExact& r) { return "fixed(" + std::to_string(r.n) + ")"; },
          [](const StandardDeviation& r) { return "sd(" + fmt_num(r.sd_threshold) + ")"; },
          [](const DualThreshold& r) {
            return "dual(" + fmt_num(r.theta1) + "," + fmt_num(r.theta2) + "," +
                   fmt_num(r.alpha) + ")";
          },
      },
      rule);
}

std::string_view to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::criterion_satisfied: return "criterion-satisfied";
    case StopReason::imf_check_satisfied: return "imf-check-satisfied";
    case StopReason::max_iter_reached: return "max-iter-reached";
    case StopReason::extrema_exhausted: return "extrema-exhausted";
  }
  return "unknown";
}

std::pair<std::vector<double>, EnvelopePair> sift_once(std::span<const double> h) {
  EnvelopePair env = local_mean(h);
  std::vector<double> detail(h.size());
  for (std::size_t t = 0; t < h.size(); ++t) detail[t] = h[t] - env.mean[t];
  return {std::move(detail), std::move(env)};
}

bool extrema_crossing_balanced(std::span<const double> d) {
  return balanced_counts(find_extrema(d).count(), count_zero_crossings(d));
}

bool imf_condition_holds(std::span<const double> d, double mean_tolerance) {
  detail::EnvelopeWorkspace ws;
  EnvelopePair env;
  if (!detail::compute_envelopes(d, ws, env)) return false;
  return balanced_counts(ws.extrema.count(), count_zero_crossings(d)) &&
         mean_small(env, d, mean_tolerance);
}

double sd_value(std::span<const double> d_prev, std::span<const double> d_cur) {
  if (d_prev.size() != d_cur.size()) {
    throw Error(ErrorKind::length_mismatch, "sd_value: sequences differ in length");
  }
  const double skip_below = kSdSkipFraction * max_abs(d_prev);
  double sd = 0.0;
  for (std::size_t t = 0; t < d_prev.size(); ++t) {
    const double p = d_prev[t];
    if (std::abs(p) < skip_below) continue;
    const double diff = p - d_cur[t];
    sd += diff * diff / (p * p + kSdGuardDelta);
  }
  return sd;
}

bool dual_threshold_satisfied(const EnvelopePair& env, double theta1, double theta2,
                              double alpha, double reference_scale) {
  if (reference_scale <= 0.0) {
    reference_scale = std::max(max_abs(env.upper), max_abs(env.lower));
  }
  const double floor_amp = kAmplitudeGuard * reference_scale;
  std::size_t evaluated = 0;
  std::size_t above_theta1 = 0;
  for (std::size_t t = 0; t < env.mean.size(); ++t) {
    const double a = env.amplitude[t];
    if (!(a >= floor_amp) || a <= 0.0) continue;
    const double sigma = std::abs(env.mean[t] / a);
    if (!(sigma < theta2)) return false;
    ++evaluated;
    if (!(sigma < theta1)) ++above_theta1;
  }
  if (evaluated == 0) return false;
  return static_cast<double>(above_theta1) <= alpha * static_cast<double>(evaluated);
}

SiftResult extract_imf(std::span<const double> h0, const StopCriterion& criterion) {
  criterion.validate();

  thread_local detail::EnvelopeWorkspace ws;
  thread_local EnvelopePair env;
  thread_local std::vector<double> prev;

  SiftResult result;
  result.imf.assign(h0.begin(), h0.end());
  std::vector<double>& h = result.imf;
  const std::size_t n = h.size();

  if (!detail::compute_envelopes(h, ws, env)) {
    throw Error(ErrorKind::too_few_extrema, "input has no maximum or no minimum to sift");
  }

  const bool track_prev = std::holds_alternative<StandardDeviation>(criterion.rule);
  int streak = 0;

  for (int iter = 1;; ++iter) {
    if (track_prev) prev.assign(h.begin(), h.end());
    for (std::size_t t = 0; t < n; ++t) h[t] -= env.mean[t];
    result.iterations = iter;

    if (const auto* fixed = std::get_if<FixedExact>(&criterion.rule); fixed && iter >= fixed->n) {
      result.stop_reason = StopReason::criterion_satisfied;
      return result;
    }

    if (!detail::compute_envelopes(h, ws, env)) {
      result.stop_reason = StopReason::extrema_exhausted;
      return result;
    }

    const bool balanced = balanced_counts(ws.extrema.count(), count_zero_crossings(h));
    bool stop = false;
    StopReason reason = StopReason::criterion_satisfied;

    if (const auto* check = std::get_if<FixedWithImfCheck>(&criterion.rule)) {
      streak = (balanced && mean_small(env, h, kImfMeanTolerance)) ? streak + 1 : 0;
      stop = iter >= check->n && streak >= check->consecutive;
      reason = StopReason::imf_check_satisfied;
    } else if (const auto* sd = std::get_if<StandardDeviation>(&criterion.rule)) {
      stop = sd_value(prev, h) < sd->sd_threshold;
    } else if (const auto* dual = std::get_if<DualThreshold>(&criterion.rule)) {
      stop = balanced &&
             dual_threshold_satisfied(env, dual->theta1, dual->theta2, dual->alpha, max_abs(h));
    }

    if (stop) {
      result.stop_reason = reason;
      return result;
    }
    if (iter >= criterion.max_iter) {
      result.stop_reason = StopReason::max_iter_reached;
      return result;
    }
  }
}

}  // namespace modekit

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "modekit/signal.hpp"

namespace modekit {

/// Sift at least `n` times, then stop once the IMF check has held for
/// `consecutive` successive passes. consecutive = 1 reads the rule as
/// "n passes, then the first pass passing the check"; n = 1 with
/// consecutive = N reads it as "the check held N times in a row".
struct FixedWithImfCheck {
  int n = 10;
  int consecutive = 1;
};

/// Exactly `n` passes, no content test.
struct FixedExact {
  int n = 10;
};

/// Consecutive-iteration deviation (see sd_value) below the threshold.
struct StandardDeviation {
  double sd_threshold = 0.2;
};

/// sigma(t) = |m(t)/a(t)| below theta1 on a (1 - alpha) fraction of the
/// samples and below theta2 everywhere.
struct DualThreshold {
  double theta1 = 0.05;
  double theta2 = 0.5;
  double alpha = 0.05;
};

inline constexpr int kDefaultMaxIter = 5000;

struct StopCriterion {
  std::variant<FixedWithImfCheck, FixedExact, StandardDeviation, DualThreshold> rule =
      DualThreshold{};
  int max_iter = kDefaultMaxIter;

  static StopCriterion fixed_with_imf_check(int n, int consecutive = 1,
                                            int max_iter = kDefaultMaxIter);
  static StopCriterion fixed_exact(int n, int max_iter = kDefaultMaxIter);
  static StopCriterion standard_deviation(double sd_threshold = 0.2,
                                          int max_iter = kDefaultMaxIter);
  static StopCriterion dual_threshold(double theta1 = 0.05, double theta2 = 0.5,
                                      double alpha = 0.05, int max_iter = kDefaultMaxIter);

  /// Throws Error(invalid_argument) when a parameter is out of range.
  void validate() const;

  /// Short tag: "fixed-check", "fixed", "sd" or "dual".
  std::string_view kind() const noexcept;

  /// Human-readable form including parameters, e.g. "dual(0.05,0.5,0.05)".
  std::string label() const;
};

enum class StopReason {
  criterion_satisfied,
  imf_check_satisfied,
  max_iter_reached,
  extrema_exhausted,  // a pass left the detail without a max or a min
};

std::string_view to_string(StopReason reason) noexcept;

struct SiftResult {
  std::vector<double> imf;
  int iterations = 0;
  StopReason stop_reason = StopReason::criterion_satisfied;
};

inline constexpr double kImfMeanTolerance = 0.05;
inline constexpr double kSdGuardDelta = 1e-12;
inline constexpr double kSdSkipFraction = 1e-8;
inline constexpr double kAmplitudeGuard = 1e-12;

/// One sifting pass: detail = h - m(t). Throws Error(too_few_extrema).
std::pair<std::vector<double>, EnvelopePair> sift_once(std::span<const double> h);

/// |zero crossings - extrema| <= 1 only.
bool extrema_crossing_balanced(std::span<const double> d);

/// Both IMF conditions: the extrema/zero-crossing balance and
/// max |m(t)| <= mean_tolerance * max |d|. False when envelopes cannot be built.
bool imf_condition_holds(std::span<const double> d, double mean_tolerance = kImfMeanTolerance);

/// Sum over t of (prev - cur)^2 / (prev^2 + 1e-12), skipping samples where
/// |prev| < 1e-8 * max |prev|. Throws Error(length_mismatch).
double sd_value(std::span<const double> d_prev, std::span<const double> d_cur);

/// Samples with a(t) < 1e-12 * reference_scale are left out of both tests.
/// A non-positive reference_scale falls back to max(|upper|, |lower|).
bool dual_threshold_satisfied(const EnvelopePair& env, double theta1, double theta2,
                              double alpha, double reference_scale = 0.0);

/// Repeats sift_once until the criterion declares the detail an IMF.
/// The criterion is checked after every full pass, on the new detail.
/// DualThreshold also requires extrema and zero crossings to differ by <= 1.
/// Throws Error(too_few_extrema) if h0 itself has no max or no min.
SiftResult extract_imf(std::span<const double> h0, const StopCriterion& criterion);

}  // namespace modekit

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "modekit/error.hpp"

namespace modekit {

/// Uniformly sampled, finite, real-valued time series.
class Signal {
 public:
  /// Throws Error(invalid_signal) on an empty sample vector, a non-finite
  /// sample or a non-positive sample rate.
  Signal(std::vector<double> samples, double sample_rate);

  std::span<const double> samples() const noexcept { return samples_; }
  double sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }

 private:
  std::vector<double> samples_;
  double sample_rate_;
};

struct Extremum {
  std::size_t index;
  double value;

  friend bool operator==(const Extremum&, const Extremum&) = default;
};

/// Interior local maxima and minima, each sorted by index. Maxima and minima
/// strictly alternate when merged.
struct ExtremaSet {
  std::vector<Extremum> maxima;
  std::vector<Extremum> minima;

  std::size_t count() const noexcept { return maxima.size() + minima.size(); }
};

struct EnvelopePair {
  std::vector<double> upper;
  std::vector<double> lower;
  std::vector<double> mean;       // (upper + lower) / 2
  std::vector<double> amplitude;  // (upper - lower) / 2
};

enum class BoundaryPolicy {
  none,    // spline through the given knots only
  mirror,  // reflect the two nearest knots across each endpoint
};

/// Strict local extrema. A flat run qualifies as one extremum located at its
/// midpoint (rounded down); runs touching either endpoint never qualify.
ExtremaSet find_extrema(std::span<const double> x);
inline ExtremaSet find_extrema(const Signal& s) { return find_extrema(s.samples()); }

/// Sign changes between consecutive non-zero samples. Runs of exact zeros
/// are skipped, so a zero run between opposite signs counts once.
std::size_t count_zero_crossings(std::span<const double> x) noexcept;
inline std::size_t count_zero_crossings(const Signal& s) noexcept {
  return count_zero_crossings(s.samples());
}

/// Natural cubic spline through the knots (after optional boundary extension)
/// sampled at 0, 1, ..., length - 1.
///
/// Throws Error(too_few_extrema) if fewer than two knots remain after
/// extension, Error(invalid_argument) if indices are not strictly increasing
/// or fall outside [0, length).
std::vector<double> interpolate_envelope(std::span<const Extremum> knots,
                                         std::size_t length,
                                         BoundaryPolicy boundary = BoundaryPolicy::mirror);

/// Upper/lower spline envelopes through the maxima/minima (mirror boundary)
/// plus their mean and half-difference.
///
/// Needs at least one maximum and one minimum; mirroring turns each into
/// three knots. Throws Error(too_few_extrema) otherwise, which means the
/// input holds at most one extremum and is a residue.
EnvelopePair local_mean(std::span<const double> x);
inline EnvelopePair local_mean(const Signal& s) { return local_mean(s.samples()); }

namespace detail {

// Scratch buffers for the allocation-free sifting path.
struct EnvelopeWorkspace {
  ExtremaSet extrema;
  std::vector<double> knot_x;
  std::vector<double> knot_y;
  std::vector<double> second_deriv;
  std::vector<double> scratch;
};

// Fills `env` (resized to x.size()). Returns false when envelopes cannot be
// built; `ws.extrema` always holds the extrema of x afterwards.
bool compute_envelopes(std::span<const double> x, EnvelopeWorkspace& ws, EnvelopePair& env);

// Natural spline through (knot_x, knot_y), evaluated at integer positions.
void natural_spline_sample(std::span<const double> knot_x, std::span<const double> knot_y,
                           std::span<double> out, std::vector<double>& second_deriv,
                           std::vector<double>& scratch);

}  // namespace detail

}  // namespace modekit

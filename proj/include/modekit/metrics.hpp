#pragma once

#include <optional>
#include <span>
#include <vector>

#include "modekit/decompose.hpp"
#include "modekit/signal.hpp"

namespace modekit {

inline constexpr double kDefaultInteriorFraction = 0.8;

/// Mean square error between the original and sum(imfs) + residue.
/// Throws Error(length_mismatch).
double ecm(const Decomposition& decomp, const Signal& original);
double ecm(const Decomposition& decomp, std::span<const double> original);

/// Sum over t and ordered pairs j != k of c_j(t) c_k(t), divided by the
/// energy of the reconstruction. The residue is included as a component.
/// Throws Error(empty_decomposition) when there are no IMFs.
double orthogonality_index(const Decomposition& decomp);

/// 2 * length / (number of extrema), in samples.
/// Throws Error(too_few_extrema) below two extrema.
double mean_period_samples(std::span<const double> mode);

/// mean_period_samples converted to seconds.
double mean_period(std::span<const double> mode, double sample_rate);

/// Pearson correlation over the centred `interior_fraction` of the samples.
/// Throws Error(length_mismatch), Error(invalid_argument) for a fraction
/// outside (0, 1], Error(zero_variance) when either window is constant.
double mode_correlation(std::span<const double> mode, std::span<const double> reference,
                        double interior_fraction = kDefaultInteriorFraction);

/// [begin, end) of the centred window used by mode_correlation.
std::pair<std::size_t, std::size_t> interior_window(std::size_t length, double fraction);

struct ModeReport {
  long long iterations = 0;
  std::optional<double> mean_period_samples;  // empty below two extrema
  double energy = 0.0;                        // sum of squares
};

struct DecompositionReport {
  std::size_t imf_count = 0;
  long long total_iterations = 0;
  double elapsed_seconds = 0.0;
  double ecm = 0.0;
  double ecm_relative = 0.0;  // ecm / mean(x^2); 0 for an all-zero input
  std::optional<double> orthogonality_index;  // empty when there are no IMFs
  std::vector<ModeReport> per_mode;
};

DecompositionReport make_report(const Decomposition& decomp, const Signal& original);

}  // namespace modekit

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "modekit/noise.hpp"
#include "modekit/sifting.hpp"
#include "modekit/signal.hpp"

namespace modekit {

inline constexpr int kDefaultMaxModes = 16;
inline constexpr std::size_t kMinDecomposeLength = 4;

enum class Method { emd, eemd, ceemdan };

std::string_view to_string(Method method) noexcept;
/// Throws Error(invalid_argument) for an unknown name.
Method parse_method(std::string_view name);

enum class NoiseScale {
  relative,  // noise std = nstd * std(reference signal)
  absolute,  // noise std = nstd
};

struct EnsembleConfig {
  NoisePlan noise;
  StopCriterion criterion;
  int max_modes = kDefaultMaxModes;
  NoiseScale scale = NoiseScale::relative;
  int threads = 1;  // execution only; results do not depend on it

  void validate() const;
};

struct ModeDiagnostics {
  long long iterations = 0;  // summed over realizations for ensembles
  StopReason stop_reason = StopReason::criterion_satisfied;  // most frequent
};

struct Decomposition {
  Method method = Method::emd;
  std::vector<std::vector<double>> imfs;  // highest frequency first
  std::vector<double> residue;
  std::vector<ModeDiagnostics> modes;
  long long total_iterations = 0;
  double elapsed_seconds = 0.0;
  double sample_rate = 1.0;

  // Configuration snapshot; `noise` is meaningful for eemd and ceemdan only.
  StopCriterion criterion;
  int max_modes = kDefaultMaxModes;
  NoisePlan noise;
  NoiseScale scale = NoiseScale::relative;

  std::size_t imf_count() const noexcept { return imfs.size(); }
  /// Sum of all modes plus the residue.
  std::vector<double> reconstruction() const;
};

/// Sifts IMFs off the running residue until it holds at most one interior
/// extremum or max_modes is reached. Completeness is exact by construction.
/// Throws Error(signal_too_short) below four samples.
Decomposition emd(const Signal& signal, const StopCriterion& criterion,
                  int max_modes = kDefaultMaxModes);

/// Ensemble EMD: mean of per-realization modes of signal + noise_i. Missing
/// modes of a realization count as zero; residue is the mean residue.
Decomposition eemd(const Signal& signal, const EnsembleConfig& config);

/// Complete ensemble EMD with adaptive noise. Mode k+1 is the ensemble mean
/// of the first EMD mode of r_k + eps_k * E_k(w_i), with E_k the k-th EMD
/// mode of noise w_i, eps_0 = nstd * std(x) and eps_k = nstd * std(r_k).
Decomposition ceemdan(const Signal& signal, const EnsembleConfig& config);

/// First sifted mode of x. Throws Error(too_few_extrema) on inputs without
/// a maximum and a minimum.
std::vector<double> emd_first_mode(std::span<const double> x, const StopCriterion& criterion);

}  // namespace modekit

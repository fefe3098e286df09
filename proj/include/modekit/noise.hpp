#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace modekit {

/// Noise realizations for the ensemble methods.
///
/// Realization i draws from std::mt19937_64 seeded with
/// realization_seed(master_seed, i) and maps pairs of 53-bit uniforms to
/// normals with the Box-Muller transform. Both steps are fixed for
/// kNoiseStreamVersion; golden outputs depend on them.
inline constexpr int kNoiseStreamVersion = 1;

struct NoisePlan {
  std::uint64_t master_seed = 0;
  int nr = 1;         // number of realizations
  double nstd = 0.0;  // noise std as a fraction of the reference std

  void validate() const;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Sub-seed for stream `index` under `master`; used for noise realizations
/// and for sweep job isolation.
std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// `length` i.i.d. standard normal samples from `seed`.
std::vector<double> standard_normal(std::uint64_t seed, std::size_t length);

/// Zero-mean Gaussian noise with std nstd * target_std, realization `index`
/// of the plan. The scale is applied after generation, so doubling nstd
/// doubles every sample exactly. Throws Error(index_out_of_range) when
/// index >= nr.
std::vector<double> realization(const NoisePlan& plan, std::size_t index, std::size_t length,
                                double target_std);

}  // namespace modekit

#include "modekit/noise.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "modekit/error.hpp"

namespace modekit {

void NoisePlan::validate() const {
  if (nr < 1) throw Error(ErrorKind::invalid_argument, "nr must be >= 1");
  if (!(nstd >= 0.0) || !std::isfinite(nstd)) {
    throw Error(ErrorKind::invalid_argument, "nstd must be finite and non-negative");
  }
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::vector<double> standard_normal(std::uint64_t seed, std::size_t length) {
  std::mt19937_64 gen(seed);
  constexpr double kScale = 0x1.0p-53;
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; i += 2) {
    const double u1 = static_cast<double>((gen() >> 11) + 1) * kScale;  // (0, 1]
    const double u2 = static_cast<double>(gen() >> 11) * kScale;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    out[i] = r * std::cos(phi);
    if (i + 1 < length) out[i + 1] = r * std::sin(phi);
  }
  return out;
}

std::vector<double> realization(const NoisePlan& plan, std::size_t index, std::size_t length,
                                double target_std) {
  plan.validate();
  if (index >= static_cast<std::size_t>(plan.nr)) {
    throw Error(ErrorKind::index_out_of_range,
                "realization index " + std::to_string(index) + " >= nr " +
                    std::to_string(plan.nr));
  }
  if (plan.nstd == 0.0) return std::vector<double>(length, 0.0);

  std::vector<double> out = standard_normal(realization_seed(plan.master_seed, index), length);
  const double scale = plan.nstd * target_std;
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace modekit
